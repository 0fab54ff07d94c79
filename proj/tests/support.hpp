#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "branchpath/decomposition.hpp"
#include "branchpath/flatnorm.hpp"

namespace testing_support {

using branchpath::Point;

inline Point pt(double x, double y) { return Point{{x, y}}; }
inline Point pt(double x, double y, double z) { return Point{{x, y, z}}; }

inline Point random_point(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Point p(d);
  for (int j = 0; j < d; ++j) p[j] = u(rng);
  return p;
}

inline branchpath::SignedAtomicMeasure random_positive_measure(std::mt19937_64& rng, int atoms, int d, double lo,
                                                              double hi, double total = 1.0) {
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<branchpath::Atom> raw;
  double s = 0;
  for (int i = 0; i < atoms; ++i) {
    raw.push_back({random_point(rng, d, lo, hi), w(rng)});
    s += raw.back().w;
  }
  for (auto& a : raw) a.w *= total / s;
  return branchpath::canonicalize(std::move(raw));
}

/// Random polygonal current: a few random polylines with random multiplicities.
inline branchpath::PolyhedralCurrent random_current(std::mt19937_64& rng, int d = 2, int polylines = 3) {
  std::uniform_int_distribution<int> len(1, 4);
  std::uniform_real_distribution<double> theta(-2.0, 2.0);
  std::vector<branchpath::Segment> raw;
  for (int k = 0; k < polylines; ++k) {
    Point prev = random_point(rng, d, -1.0, 1.0);
    const double th = theta(rng);
    for (int i = 0, n = len(rng); i < n; ++i) {
      Point next = random_point(rng, d, -1.0, 1.0);
      raw.push_back({prev, next, th});
      prev = next;
    }
  }
  return branchpath::canonicalize(std::move(raw));
}

}  // namespace testing_support

namespace testing_support {

// Sum of weighted random paths whose vertex indices increase, so the flow graph is acyclic.
inline branchpath::PolyhedralCurrent random_acyclic_flow(std::mt19937_64& rng, int d = 2, int points = 8,
                                                         int paths = 5) {
  std::vector<branchpath::Point> v;
  for (int i = 0; i < points; ++i) v.push_back(random_point(rng, d, -1, 1));
  std::uniform_real_distribution<double> w(0.1, 2.0), coin(0, 1);
  std::vector<branchpath::Segment> raw;
  for (int p = 0; p < paths; ++p) {
    std::vector<int> chain;
    for (int i = 0; i < points; ++i)
      if (coin(rng) < 0.4) chain.push_back(i);
    if (chain.size() < 2) chain = {0, points - 1};
    const double theta = w(rng);
    for (std::size_t i = 1; i < chain.size(); ++i) raw.push_back({v[chain[i - 1]], v[chain[i]], theta});
  }
  return branchpath::canonicalize(std::move(raw));
}

/// A radius near r that is generic for t.
inline double generic_near(const branchpath::PolyhedralCurrent& t, const Point& x, double r) {
  for (int i = 0; i < 100; ++i) {
    if (branchpath::is_generic_radius(t, x, r)) return r;
    r += 1e-4 * (i + 1);
  }
  throw std::runtime_error("no generic radius found");
}

/// Total weight of the paths traversing edge e in its own orientation.
inline double covering_weight(const branchpath::PathDecomposition& d, const branchpath::Segment& e) {
  double w = 0;
  for (const auto& p : d.paths)
    for (std::size_t i = 1; i < p.vertices.size(); ++i)
      if (p.vertices[i - 1] == e.a && p.vertices[i] == e.b) w += p.weight;
  return w;
}

/// Random lattice-aligned polylines: steps along +-x, +-y, +-(1,1).
inline branchpath::PolyhedralCurrent random_lattice_current(std::mt19937_64& rng, const branchpath::TriComplex& c,
                                                            int pieces) {
  const int n = c.cells_per_axis();
  std::uniform_int_distribution<int> coord(0, n), dir(0, 5), len(1, std::max(1, n / 2));
  std::uniform_real_distribution<double> w(-2, 2);
  static constexpr int kDx[] = {1, -1, 0, 0, 1, -1}, kDy[] = {0, 0, 1, -1, 1, -1};
  std::vector<branchpath::Segment> raw;
  for (int p = 0; p < pieces; ++p) {
    const int i = coord(rng), j = coord(rng), m = dir(rng);
    const int l = len(rng);
    const int i2 = std::clamp(i + kDx[m] * l, 0, n), j2 = std::clamp(j + kDy[m] * l, 0, n);
    const int steps = std::min(kDx[m] ? std::abs(i2 - i) : n, kDy[m] ? std::abs(j2 - j) : n);
    if (steps == 0) continue;
    raw.push_back({c.vertex(i, j), c.vertex(i + kDx[m] * steps, j + kDy[m] * steps), w(rng)});
  }
  return branchpath::canonicalize(std::move(raw));
}

}  // namespace testing_support
