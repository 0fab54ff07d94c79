#include "branchpath/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "branchpath/numeric.hpp"

namespace branchpath {
namespace {

struct LexLess {
  bool operator()(const Point& a, const Point& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

// Directed graph of a canonical current; every edge carries theta > 0 from tail to head.
struct FlowGraph {
  std::vector<Point> vertices;
  std::vector<int> tail, head;
  std::vector<double> theta;
  std::vector<std::vector<int>> out, in;

  explicit FlowGraph(const PolyhedralCurrent& t) {
    std::map<Point, int, LexLess> index;
    for (const auto& e : t.edges()) {
      index.emplace(e.a, 0);
      index.emplace(e.b, 0);
    }
    for (auto& [p, i] : index) {
      i = static_cast<int>(vertices.size());
      vertices.push_back(p);
    }
    out.resize(vertices.size());
    in.resize(vertices.size());
    for (const auto& e : t.edges()) {
      const int k = static_cast<int>(tail.size());
      tail.push_back(index.at(e.a));
      head.push_back(index.at(e.b));
      theta.push_back(e.theta);
      out[tail.back()].push_back(k);
      in[head.back()].push_back(k);
    }
  }

  std::size_t edge_count() const { return theta.size(); }

  // Edge indices of a directed cycle among edges with positive flow, or empty.
  std::vector<int> find_cycle(const std::vector<double>& flow) const {
    enum : char { White, Grey, Black };
    std::vector<char> colour(vertices.size(), White);
    std::vector<int> via(vertices.size(), -1);
    for (std::size_t root = 0; root < vertices.size(); ++root) {
      if (colour[root] != White) continue;
      // Iterative DFS keeping the position in each adjacency list.
      std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(root), 0}};
      colour[root] = Grey;
      while (!stack.empty()) {
        auto& [v, pos] = stack.back();
        if (pos == out[v].size()) {
          colour[v] = Black;
          stack.pop_back();
          continue;
        }
        const int e = out[v][pos++];
        if (flow[e] <= 0) continue;
        const int w = head[e];
        if (colour[w] == Grey) {
          std::vector<int> cycle{e};
          for (int u = v; u != w; u = tail[via[u]]) cycle.push_back(via[u]);
          std::reverse(cycle.begin(), cycle.end());
          return cycle;
        }
        if (colour[w] == White) {
          colour[w] = Grey;
          via[w] = e;
          stack.push_back({w, 0});
        }
      }
    }
    return {};
  }

  PolyhedralCurrent current(const std::vector<double>& flow) const {
    std::vector<Segment> raw;
    for (std::size_t e = 0; e < edge_count(); ++e)
      if (flow[e] > 0) raw.push_back({vertices[tail[e]], vertices[head[e]], flow[e]});
    return canonicalize(std::move(raw));
  }
};

}  // namespace

double WeightedPath::length() const {
  std::vector<double> pieces;
  for (std::size_t i = 1; i < vertices.size(); ++i) pieces.push_back((vertices[i] - vertices[i - 1]).norm());
  return pairwise_sum(pieces);
}

double PathDecomposition::total_weight() const {
  CompensatedSum s;
  for (const auto& p : paths) s.add(p.weight);
  return s.value();
}

PolyhedralCurrent remove_cycles(const PolyhedralCurrent& t) {
  const FlowGraph g(t);
  std::vector<double> flow = g.theta;
  bool changed = false;
  // Each round zeroes at least one edge, so this stops after at most |E| rounds.
  for (auto cycle = g.find_cycle(flow); !cycle.empty(); cycle = g.find_cycle(flow)) {
    double m = flow[cycle.front()];
    for (int e : cycle) m = std::min(m, flow[e]);
    for (int e : cycle) flow[e] = flow[e] <= m ? 0.0 : flow[e] - m;
    changed = true;
  }
  return changed ? g.current(flow) : t;
}

bool is_acyclic(const PolyhedralCurrent& t) {
  const FlowGraph g(t);
  return g.find_cycle(g.theta).empty();
}

PathDecomposition good_decomposition(const PolyhedralCurrent& t) {
  const FlowGraph g(t);
  if (!g.find_cycle(g.theta).empty()) throw Error(ErrorKind::NotAcyclic, "good_decomposition needs an acyclic current");

  std::vector<double> residual = g.theta;
  const double scale = g.theta.empty() ? 0.0 : *std::max_element(g.theta.begin(), g.theta.end());
  const double dust = 1e-13 * scale;
  auto net_out = [&](int v) {
    CompensatedSum s;
    for (int e : g.out[v]) s.add(residual[e]);
    for (int e : g.in[v]) s.add(-residual[e]);
    return s.value();
  };

  PathDecomposition d;
  for (std::size_t s = 0; s < g.vertices.size(); ++s) {
    for (double excess = net_out(static_cast<int>(s)); excess > dust; excess = net_out(static_cast<int>(s))) {
      std::vector<int> walk;
      int v = static_cast<int>(s);
      for (;;) {
        int best = -1;
        for (int e : g.out[v])
          if (residual[e] > 0 && (best < 0 || residual[e] > residual[best])) best = e;
        if (best < 0) break;
        walk.push_back(best);
        v = g.head[best];
      }
      if (walk.empty()) break;  // only rounding dust left at s

      double w = std::min(excess, -net_out(v));
      for (int e : walk) w = std::min(w, residual[e]);
      if (!(w > 0)) break;
      for (int e : walk) residual[e] = residual[e] - w <= dust ? 0.0 : residual[e] - w;

      WeightedPath p;
      p.weight = w;
      p.vertices.push_back(g.vertices[s]);
      for (int e : walk) p.vertices.push_back(g.vertices[g.head[e]]);
      d.paths.push_back(std::move(p));
    }
  }
  return d;
}

PolyhedralCurrent current_of(const PathDecomposition& d) {
  std::vector<Segment> raw;
  for (const auto& p : d.paths)
    for (std::size_t i = 1; i < p.vertices.size(); ++i) raw.push_back({p.vertices[i - 1], p.vertices[i], p.weight});
  return canonicalize(std::move(raw));
}

CellPartition partition_by_cells(const PathDecomposition& d, const Grid& grid) {
  CellPartition out{grid, {}, {}};
  auto cell_of = [&](const Point& p) {
    if (grid.on_skeleton(p)) throw Error(ErrorKind::EndpointOnSkeleton, "path endpoint on a cell face; shift the grid first");
    const auto idx = grid.locate(p);
    if (!idx) throw Error(ErrorKind::InvalidArgument, "path endpoint outside the grid");
    return *idx;
  };
  for (const auto& p : d.paths) out.pieces[{cell_of(p.start()), cell_of(p.end())}].paths.push_back(p);
  for (const auto& [key, piece] : out.pieces) out.parts.emplace(key, current_of(piece));
  return out;
}

CombinedMultiplicity combined_multiplicity(const CellPartition& p) {
  std::vector<PolyhedralCurrent> parts;
  parts.reserve(p.parts.size());
  for (const auto& [key, part] : p.parts) parts.push_back(part);
  CombinedMultiplicity out{common_refinement(parts), {}};
  out.theta_bar = out.arrangement.theta.cwiseAbs().rowwise().sum();
  return out;
}

double combined_multiplicity_mass(const CellPartition& p, const CostSpec& cost) {
  const auto c = combined_multiplicity(p);
  const Eigen::VectorXd len = c.arrangement.lengths();
  std::vector<double> terms(static_cast<std::size_t>(len.size()));
  for (Eigen::Index i = 0; i < len.size(); ++i) terms[i] = cost(c.theta_bar(i)) * len(i);
  return pairwise_sum(terms);
}

}  // namespace branchpath
