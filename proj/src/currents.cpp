#include "branchpath/currents.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "branchpath/numeric.hpp"

namespace branchpath {
namespace {

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

struct Tagged {
  Segment seg;
  int component;
};

struct Accum {
  std::vector<CompensatedSum> sum;
  std::vector<double> contrib;
};

// Shared subdivision machinery behind canonicalize() and common_refinement().
struct Refinement {
  std::vector<Point> vertices;
  std::map<std::pair<int, int>, Accum> edges;  // key (lo id, hi id), sums along lo -> hi
};

Refinement refine(std::vector<Tagged> raw, int components) {
  Refinement out;
  std::erase_if(raw, [](const Tagged& t) { return t.seg.theta == 0.0 || t.seg.length() <= kMinEdgeLength; });
  if (raw.empty()) return out;

  const auto d = raw.front().seg.a.size();
  for (const auto& t : raw) {
    if (t.seg.a.size() != d || t.seg.b.size() != d) throw Error(ErrorKind::DimensionMismatch, "segments of different dimension");
    require_finite(t.seg.a, "segment endpoint");
    require_finite(t.seg.b, "segment endpoint");
    if (!std::isfinite(t.seg.theta)) throw Error(ErrorKind::NonFinite, "segment multiplicity");
  }

  // Identify endpoints closer than kAtomTol.
  std::vector<const Point*> ends;
  ends.reserve(2 * raw.size());
  for (const auto& t : raw) {
    ends.push_back(&t.seg.a);
    ends.push_back(&t.seg.b);
  }
  std::vector<std::size_t> order(ends.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return lex_less(*ends[i], *ends[j]); });
  std::vector<int> vid(ends.size());
  for (std::size_t i : order) {
    const Point& p = *ends[i];
    int match = -1;
    for (int v = static_cast<int>(out.vertices.size()) - 1; v >= 0; --v) {
      if (p[0] - out.vertices[v][0] > kAtomTol) break;
      if (sup_dist(p, out.vertices[v]) <= kAtomTol) {
        match = v;
        break;
      }
    }
    if (match < 0) {
      out.vertices.push_back(p);
      match = static_cast<int>(out.vertices.size()) - 1;
    }
    vid[i] = match;
  }
  // vertices are sorted by first coordinate, which bounds the search below.
  std::vector<double> first(out.vertices.size());
  for (std::size_t v = 0; v < out.vertices.size(); ++v) first[v] = out.vertices[v][0];

  for (std::size_t s = 0; s < raw.size(); ++s) {
    const Segment& seg = raw[s].seg;
    const int ia = vid[2 * s], ib = vid[2 * s + 1];
    if (ia == ib) continue;
    const Point& a = out.vertices[ia];
    const Point& b = out.vertices[ib];
    const Point u = b - a;
    const double len2 = u.squaredNorm();
    const double len = std::sqrt(len2);

    std::vector<std::pair<double, int>> cuts{{0.0, ia}, {1.0, ib}};
    const double lo = std::min(a[0], b[0]) - kOnSegmentTol, hi = std::max(a[0], b[0]) + kOnSegmentTol;
    auto it = std::lower_bound(first.begin(), first.end(), lo);
    for (auto v = static_cast<int>(it - first.begin()); v < static_cast<int>(first.size()) && first[v] <= hi; ++v) {
      if (v == ia || v == ib) continue;
      const double t = (out.vertices[v] - a).dot(u) / len2;
      if (t * len <= kOnSegmentTol || (1 - t) * len <= kOnSegmentTol) continue;
      if ((a + t * u - out.vertices[v]).norm() <= kOnSegmentTol) cuts.emplace_back(t, v);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int p = cuts[c].second, q = cuts[c + 1].second;
      if (p == q) continue;
      const auto key = std::minmax(p, q);
      auto& acc = out.edges[{key.first, key.second}];
      if (acc.sum.empty()) {
        acc.sum.resize(components);
        acc.contrib.assign(components, 0.0);
      }
      const double signed_theta = p < q ? seg.theta : -seg.theta;
      acc.sum[raw[s].component].add(signed_theta);
      acc.contrib[raw[s].component] += std::abs(seg.theta);
    }
  }
  return out;
}

double settle(const Accum& acc, int c) {
  const double v = acc.sum[c].value();
  return std::abs(v) <= 1e-12 * acc.contrib[c] ? 0.0 : v;
}

std::vector<Tagged> tag(const PolyhedralCurrent& t, int component, double scale = 1.0) {
  std::vector<Tagged> out;
  out.reserve(t.size());
  for (const auto& e : t.edges()) out.push_back({{e.a, e.b, scale * e.theta}, component});
  return out;
}

// Parameter interval of the segment inside the closed cube of half-edge r around x.
std::optional<std::pair<double, double>> clip(const Point& a, const Point& b, const Point& x, double r) {
  double t0 = 0, t1 = 1;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double u = b[j] - a[j];
    const double lo = x[j] - r, hi = x[j] + r;
    if (u == 0) {
      if (a[j] < lo || a[j] > hi) return std::nullopt;
      continue;
    }
    double ta = (lo - a[j]) / u, tb = (hi - a[j]) / u;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

std::optional<ZeroSlice> try_slice(const PolyhedralCurrent& t, const Point& x, double r) {
  ZeroSlice out;
  for (const auto& e : t.edges()) {
    if (std::abs(sup_dist(e.a, x) - r) <= kGenericRadiusTol || std::abs(sup_dist(e.b, x) - r) <= kGenericRadiusTol)
      return std::nullopt;
    const auto range = clip(e.a, e.b, x, r);
    if (!range) continue;
    const auto [t0, t1] = *range;
    const Point u = e.b - e.a;
    const double len = u.norm();
    // Touching the sphere without crossing, or running along a face.
    if ((t1 - t0) * len <= kGenericRadiusTol) return std::nullopt;
    if (sup_dist(Point(e.a + 0.5 * (t0 + t1) * u), x) >= r - kGenericRadiusTol) return std::nullopt;
    if (t0 > 0) out.atoms.push_back({e.a + t0 * u, -1, e.theta});
    if (t1 < 1) out.atoms.push_back({e.a + t1 * u, +1, e.theta});
  }
  return out;
}

}  // namespace

PolyhedralCurrent canonicalize(std::vector<Segment> raw) {
  std::vector<Tagged> tagged;
  tagged.reserve(raw.size());
  for (auto& s : raw) tagged.push_back({std::move(s), 0});
  const Refinement ref = refine(std::move(tagged), 1);

  PolyhedralCurrent out;
  for (const auto& [key, acc] : ref.edges) {
    const double theta = settle(acc, 0);
    if (theta == 0.0) continue;
    if (theta > 0)
      out.edges_.push_back({ref.vertices[key.first], ref.vertices[key.second], theta});
    else
      out.edges_.push_back({ref.vertices[key.second], ref.vertices[key.first], -theta});
  }
  std::sort(out.edges_.begin(), out.edges_.end(), [](const Segment& s, const Segment& t) {
    if (lex_less(s.a, t.a)) return true;
    if (lex_less(t.a, s.a)) return false;
    return lex_less(s.b, t.b);
  });
  return out;
}

PolyhedralCurrent operator+(const PolyhedralCurrent& s, const PolyhedralCurrent& t) {
  std::vector<Segment> raw(s.edges());
  raw.insert(raw.end(), t.edges().begin(), t.edges().end());
  return canonicalize(std::move(raw));
}

PolyhedralCurrent operator-(const PolyhedralCurrent& s, const PolyhedralCurrent& t) {
  std::vector<Segment> raw(s.edges());
  for (const auto& e : t.edges()) raw.push_back({e.a, e.b, -e.theta});
  return canonicalize(std::move(raw));
}

PolyhedralCurrent operator*(double c, const PolyhedralCurrent& t) {
  std::vector<Segment> raw(t.edges());
  for (auto& e : raw) e.theta *= c;
  return canonicalize(std::move(raw));
}

double edgewise_distance(const PolyhedralCurrent& s, const PolyhedralCurrent& t) {
  double m = 0;
  const auto diff = s - t;
  for (const auto& e : diff.edges()) m = std::max(m, e.theta);
  return m;
}

PolyhedralCurrent polyline(std::span<const Point> vertices, double theta) {
  std::vector<Segment> raw;
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) raw.push_back({vertices[i], vertices[i + 1], theta});
  return canonicalize(std::move(raw));
}

double mass(const PolyhedralCurrent& t) {
  std::vector<double> terms;
  terms.reserve(t.size());
  for (const auto& e : t.edges()) terms.push_back(std::abs(e.theta) * e.length());
  return pairwise_sum(terms);
}

double h_mass(const PolyhedralCurrent& t, const CostSpec& cost) {
  std::vector<double> terms;
  terms.reserve(t.size());
  for (const auto& e : t.edges()) terms.push_back(cost(e.theta) * e.length());
  return pairwise_sum(terms);
}

SignedAtomicMeasure boundary(const PolyhedralCurrent& t) {
  std::vector<Atom> raw;
  raw.reserve(2 * t.size());
  for (const auto& e : t.edges()) {
    raw.push_back({e.b, e.theta});
    raw.push_back({e.a, -e.theta});
  }
  return canonicalize(std::move(raw));
}

PolyhedralCurrent restrict_current(const PolyhedralCurrent& t, const Region& region, bool complement) {
  std::vector<Segment> kept;
  for (const auto& e : t.edges()) {
    std::vector<double> ts{0.0};
    const auto cuts = region.crossings(e.a, e.b);
    ts.insert(ts.end(), cuts.begin(), cuts.end());
    ts.push_back(1.0);
    const Point u = e.b - e.a;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const Point mid = e.a + 0.5 * (ts[i] + ts[i + 1]) * u;
      if (region.contains(mid) != complement) kept.push_back({e.a + ts[i] * u, e.a + ts[i + 1] * u, e.theta});
    }
  }
  return canonicalize(std::move(kept));
}

PolyhedralCurrent cone(const Point& x, const SignedAtomicMeasure& mu) {
  require_finite(x, "cone vertex");
  std::vector<Segment> raw;
  raw.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    if (a.x.size() != x.size()) throw Error(ErrorKind::DimensionMismatch, "cone vertex/measure");
    if (sup_dist(a.x, x) <= kAtomTol) continue;
    raw.push_back({x, a.x, a.w});
  }
  return canonicalize(std::move(raw));
}

SignedAtomicMeasure ZeroSlice::measure() const {
  std::vector<Atom> raw;
  raw.reserve(atoms.size());
  for (const auto& a : atoms) raw.push_back({a.x, a.sign * a.magnitude});
  return canonicalize(std::move(raw));
}

bool is_generic_radius(const PolyhedralCurrent& t, const Point& x, double r) { return try_slice(t, x, r).has_value(); }

ZeroSlice slice(const PolyhedralCurrent& t, const Point& x, double r) {
  if (!(r > 0)) throw Error(ErrorKind::InvalidArgument, "slice radius must be positive");
  if (!t.empty() && x.size() != t.dim()) throw Error(ErrorKind::DimensionMismatch, "slice center");
  auto s = try_slice(t, x, r);
  if (!s) throw Error(ErrorKind::NonGenericRadius, "radius not generic; perturb r");
  return std::move(*s);
}

SliceRadius good_slice_radius(std::span<const PolyhedralCurrent> ts, const Point& x, const Point& y, double r0,
                              double eta0, const CostSpec& cost) {
  if (!(r0 > 0)) throw Error(ErrorKind::InvalidArgument, "r0 must be positive");
  if (!(eta0 > 1 && eta0 < 2)) throw Error(ErrorKind::InvalidArgument, "eta0 must lie in (1, 2)");
  if (ts.empty()) return {r0 * (1 + eta0) / 2, {}};

  constexpr int kCandidates = 1000;
  const double width = (eta0 - 1) * r0;
  std::vector<double> bound(ts.size());
  for (std::size_t n = 0; n < ts.size(); ++n) bound[n] = 4 * h_mass(ts[n], cost) / width;

  std::optional<SliceRadius> best;
  for (int i = 0; i < kCandidates; ++i) {
    const double r = r0 + (i + 0.5) * width / kCandidates;
    SliceRadius here{r, {}};
    bool generic = true;
    for (std::size_t n = 0; n < ts.size() && generic; ++n) {
      const auto sx = try_slice(ts[n], x, r);
      const auto sy = try_slice(ts[n], y, r);
      if (!sx || !sy) {
        generic = false;
        break;
      }
      const double value = h_mass_measure(sx->measure(), cost) + h_mass_measure(sy->measure(), cost);
      if (value > bound[n] * (1 + 1e-12)) here.violators.push_back(n);
    }
    if (!generic) continue;
    if (!best || here.violators.size() < best->violators.size()) best = std::move(here);
    if (best->violators.empty()) break;
  }
  if (!best) throw Error(ErrorKind::NoRadiusFound, "every candidate radius is non-generic");
  return *best;
}

Eigen::VectorXd Arrangement::lengths() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(segments.size()));
  for (std::size_t i = 0; i < segments.size(); ++i) out(static_cast<Eigen::Index>(i)) = (segments[i].second - segments[i].first).norm();
  return out;
}

Arrangement common_refinement(std::span<const PolyhedralCurrent> currents) {
  std::vector<Tagged> raw;
  for (std::size_t c = 0; c < currents.size(); ++c) {
    auto part = tag(currents[c], static_cast<int>(c));
    raw.insert(raw.end(), part.begin(), part.end());
  }
  const int m = static_cast<int>(currents.size());
  const Refinement ref = refine(std::move(raw), m);

  Arrangement out;
  std::vector<std::vector<double>> rows;
  for (const auto& [key, acc] : ref.edges) {
    std::vector<double> row(m);
    bool any = false;
    for (int c = 0; c < m; ++c) {
      row[c] = settle(acc, c);
      any = any || row[c] != 0.0;
    }
    if (!any) continue;
    out.segments.emplace_back(ref.vertices[key.first], ref.vertices[key.second]);
    rows.push_back(std::move(row));
  }
  out.theta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < m; ++c) out.theta(static_cast<Eigen::Index>(i), c) = rows[i][c];
  return out;
}

}  // namespace branchpath
