#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "branchpath/decomposition.hpp"
#include "branchpath/solver.hpp"
#include "support.hpp"

using namespace branchpath;
using testing_support::pt;

namespace {

const double kSqrt17Over4 = std::sqrt(17.0) / 4;

TransportInstance instance(SignedAtomicMeasure minus, SignedAtomicMeasure plus, CostSpec cost) {
  TransportInstance in;
  in.mu_minus = std::move(minus);
  in.mu_plus = std::move(plus);
  in.cost = std::move(cost);
  in.domain = Cube(pt(0.5, 0.5), 4.0);
  return in;
}

TransportInstance counterexample(int n) {
  const auto plus = canonicalize(std::vector<Atom>{{pt(0.5, 0.125), 1.0 / n}, {pt(1, 0), 1.0 - 1.0 / n}});
  return instance(dirac(pt(0, 0)), plus, CostSpec::size());
}

TransportInstance y_instance(CostSpec cost, double spread = 1.0) {
  const auto minus = canonicalize(std::vector<Atom>{{pt(-spread, 1), 0.5}, {pt(spread, 1), 0.5}});
  auto in = instance(minus, dirac(pt(0, 0)), std::move(cost));
  in.domain = Cube(pt(0, 0.5), 3.0);
  return in;
}

// Forests on the complete graph, found by scanning every edge subset: acyclic,
// each component balanced, every edge carrying flow, Steiner degree >= 3.
std::size_t brute_force_topologies(const std::vector<double>& supply, int max_steiner) {
  const int m = static_cast<int>(supply.size());
  std::set<std::vector<std::pair<int, int>>> classes;
  for (int s = 0; s <= max_steiner; ++s) {
    const int n = m + s;
    std::vector<std::pair<int, int>> all;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) all.push_back({u, v});
    for (std::uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
      std::vector<std::pair<int, int>> chosen;
      for (std::size_t i = 0; i < all.size(); ++i)
        if (mask >> i & 1u) chosen.push_back(all[i]);
      std::vector<int> comp(n);
      std::iota(comp.begin(), comp.end(), 0);
      auto find = [&](int x) {
        while (comp[x] != x) x = comp[x];
        return x;
      };
      bool ok = true;
      for (auto [u, v] : chosen) {
        const int a = find(u), b = find(v);
        if (a == b) ok = false;
        comp[a] = b;
      }
      if (!ok) continue;
      std::vector<int> degree(n, 0);
      for (auto [u, v] : chosen) ++degree[u], ++degree[v];
      for (int v = 0; v < n; ++v) ok = ok && (v < m ? degree[v] >= 1 : degree[v] >= 3);
      if (!ok) continue;
      // Flow across an edge: supply on one side once the edge is removed.
      for (std::size_t i = 0; i < chosen.size() && ok; ++i) {
        std::vector<int> side(n);
        std::iota(side.begin(), side.end(), 0);
        auto f2 = [&](int x) {
          while (side[x] != x) x = side[x];
          return x;
        };
        for (std::size_t j = 0; j < chosen.size(); ++j)
          if (j != i) side[f2(chosen[j].first)] = f2(chosen[j].second);
        double flow = 0, balance = 0;
        for (int v = 0; v < m; ++v) {
          if (f2(v) == f2(chosen[i].first)) flow += supply[v];
        }
        for (int v = 0; v < m; ++v)
          if (find(v) == find(chosen[i].first)) balance += supply[v];
        ok = std::abs(flow) > 1e-12 && std::abs(balance) <= 1e-12;
      }
      if (!ok) continue;
      // Class representative under Steiner relabeling.
      std::vector<int> perm(s);
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<std::pair<int, int>> best;
      do {
        std::vector<std::pair<int, int>> k;
        for (auto [u, v] : chosen) {
          const int a = u < m ? u : m + perm[u - m], b = v < m ? v : m + perm[v - m];
          k.push_back({std::min(a, b), std::max(a, b)});
        }
        std::sort(k.begin(), k.end());
        if (best.empty() || k < best) best = k;
      } while (std::next_permutation(perm.begin(), perm.end()));
      classes.insert(best);
    }
  }
  return classes.size();
}

}  // namespace

TEST_CASE("instance validation") {
  auto in = instance(dirac(pt(0, 0)), dirac(pt(1, 0)), CostSpec::size());
  CHECK_NOTHROW(validate(in));
  auto same = instance(dirac(pt(0, 0)), dirac(pt(0, 0)), CostSpec::size());
  try {
    solve(same, 1);
    FAIL("expected InstanceInvalid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InstanceInvalid);
  }
  CHECK_THROWS_AS(validate(instance(dirac(pt(0, 0)), dirac(pt(1, 0), 0.5), CostSpec::size())), Error);
  CHECK_THROWS_AS(validate(instance(dirac(pt(0, 0)), dirac(pt(9, 0)), CostSpec::size())), Error);

  std::vector<Atom> many;
  for (int i = 0; i < 6; ++i) many.push_back({pt(0.1 * i, 1), 1.0 / 6});
  try {
    enumerate_topologies(instance(dirac(pt(0, 0)), canonicalize(std::move(many)), CostSpec::size()), 0);
    FAIL("expected TooManyTerminals");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyTerminals);
  }
}

TEST_CASE("enumerate_topologies") {
  SUBCASE("one source, one sink") {
    const auto ts = enumerate_topologies(instance(dirac(pt(0, 0)), dirac(pt(1, 0)), CostSpec::size()), 2);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].edges.size() == 1);
    CHECK(ts[0].edges[0].from == 0);
    CHECK(ts[0].edges[0].flow == 1.0);
  }
  SUBCASE("one source, two sinks") {
    // V, the two chains through a sink, and Y.
    const auto ts = enumerate_topologies(counterexample(4), 1);
    CHECK(ts.size() == 4);
    CHECK(std::count_if(ts.begin(), ts.end(), [](const Topology& t) { return t.steiner == 1; }) == 1);
    CHECK(enumerate_topologies(counterexample(4), 2).size() == 4);
    for (const auto& t : ts) {
      // Conservation at every node.
      std::vector<double> net(t.nodes(), 0.0);
      for (const auto& e : t.edges) {
        CHECK(e.flow > 0);
        net[e.from] -= e.flow;
        net[e.to] += e.flow;
      }
      CHECK(net[0] == doctest::Approx(-1.0));
      CHECK(net[1] == doctest::Approx(0.25));
      CHECK(net[2] == doctest::Approx(0.75));
    }
  }
  SUBCASE("counts match the edge-subset brute force") {
    CHECK(enumerate_topologies(counterexample(4), 2).size() == brute_force_topologies({1.0, -0.25, -0.75}, 2));
    const auto two_two = instance(canonicalize(std::vector<Atom>{{pt(0, 0), 0.5}, {pt(0, 1), 0.5}}),
                                  canonicalize(std::vector<Atom>{{pt(1, 0), 0.3}, {pt(1, 1), 0.7}}), CostSpec::power(0.5));
    for (int s = 0; s <= 2; ++s)
      CHECK(enumerate_topologies(two_two, s).size() == brute_force_topologies({0.5, 0.5, -0.3, -0.7}, s));
    // Balanced pairs allow forests.
    const auto split = instance(canonicalize(std::vector<Atom>{{pt(0, 0), 0.5}, {pt(0, 1), 0.5}}),
                                canonicalize(std::vector<Atom>{{pt(1, 0), 0.5}, {pt(1, 1), 0.5}}), CostSpec::power(0.5));
    for (int s = 0; s <= 2; ++s)
      CHECK(enumerate_topologies(split, s).size() == brute_force_topologies({0.5, 0.5, -0.5, -0.5}, s));
  }
}

TEST_CASE("optimize_topology") {
  SUBCASE("single edge") {
    for (double alpha : {0.1, 0.5, 1.0}) {
      const auto in = instance(dirac(pt(0, 0)), dirac(pt(1, 0)), CostSpec::power(alpha));
      const auto ts = enumerate_topologies(in, 0);
      CHECK(optimize_topology(ts[0], in).energy == 1.0);
    }
  }
  SUBCASE("Y at alpha = 1 collapses") {
    const auto in = y_instance(CostSpec::power(1.0));
    for (const auto& t : enumerate_topologies(in, 1)) {
      if (t.steiner != 1) continue;
      const auto opt = optimize_topology(t, in);
      CHECK(opt.energy == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
      CHECK((opt.steiner[0] - pt(0, 0)).norm() <= 1e-9);
    }
    CHECK(solve(in, 1).energy == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("Y at alpha = 0.5 with a right angle at the sink") {
    // Two half masses merging at alpha = 0.5 branch at exactly 90 degrees, the
    // angle of the V here, so the V itself is optimal.
    const auto in = y_instance(CostSpec::power(0.5));
    const auto s = solve(in, 1);
    CHECK(s.energy == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.energy == doctest::Approx(oracle_small(in, 1e-3)).epsilon(1e-4));
  }
  SUBCASE("Y at alpha = 0.5 with a narrow V branches") {
    const auto in = y_instance(CostSpec::power(0.5), 0.5);
    const double v = 2 * std::sqrt(0.5) * std::hypot(0.5, 1.0);
    const auto s = solve(in, 1);
    CHECK(s.energy < v - 1e-3);
    CHECK(s.topology.steiner == 1);
    CHECK(s.energy == doctest::Approx(oracle_small(in, 1e-3)).epsilon(1e-4));
    // The branch angle of two half masses at alpha = 0.5 is a right angle.
    const Point x = s.steiner[0];
    const Point u = (pt(-0.5, 1) - x).normalized(), w = (pt(0.5, 1) - x).normalized();
    CHECK(std::abs(u.dot(w)) <= 1e-6);
  }
}

TEST_CASE("solve examples") {
  SUBCASE("counterexample family") {
    for (int n : {2, 4, 8, 16}) {
      const auto s = solve(counterexample(n), 2);
      CHECK(std::abs(s.energy - kSqrt17Over4) <= 1e-6);
      // Support 0 -> p -> e1.
      const auto expected = canonicalize(std::vector<Segment>{{pt(0, 0), pt(0.5, 0.125), 1.0}, {pt(0.5, 0.125), pt(1, 0), 1.0 - 1.0 / n}});
      CHECK(edgewise_distance(s.current, expected) <= 1e-12);
    }
  }
  SUBCASE("single segment, size cost") {
    const auto s = solve(instance(dirac(pt(0, 0)), dirac(pt(1, 0)), CostSpec::size()), 2);
    CHECK(s.energy == 1.0);
    CHECK(s.current.size() == 1);
  }
}

TEST_CASE("solve properties on random instances") {
  std::mt19937_64 rng(97);
  std::uniform_int_distribution<int> sources(1, 2), sinks(1, 2);
  std::uniform_real_distribution<double> alpha(0.2, 1.0);
  for (int i = 0; i < 15; ++i) {
    const int a = sources(rng), b = a == 2 ? 1 : sinks(rng);
    auto in = instance(testing_support::random_positive_measure(rng, a, 2, 0, 1),
                       testing_support::random_positive_measure(rng, b, 2, 0, 1), CostSpec::power(alpha(rng)));
    const auto s = solve(in, 1);
    CHECK(atomwise_distance(boundary(s.current), in.mu_plus - in.mu_minus) <= 1e-12);
    CHECK(s.energy == doctest::Approx(h_mass(s.current, in.cost)).epsilon(1e-14));
    CHECK(is_acyclic(s.current));
    for (const auto& t : enumerate_topologies(in, 1)) CHECK(s.energy <= optimize_topology(t, in).energy + 1e-12);
    // Direct transport from each source: every sink served by the nearest-index source (a feasible competitor).
    if (a == 1) {
      std::vector<Segment> v;
      for (const auto& at : in.mu_plus.atoms()) v.push_back({in.mu_minus.atoms()[0].x, at.x, at.w});
      CHECK(s.energy <= h_mass(canonicalize(std::move(v)), in.cost) + 1e-12);
    }
    CHECK(s.energy == doctest::Approx(oracle_small(in, 2e-3)).epsilon(1e-4));
  }
}

// With every multiplicity at most 1, theta^alpha grows as alpha decreases, so
// the optimal energy does too.
TEST_CASE("optimal energy is monotone in alpha for unit mass") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 8; ++i) {
    auto in = instance(testing_support::random_positive_measure(rng, 1, 2, 0, 1),
                       testing_support::random_positive_measure(rng, 2, 2, 0, 1), CostSpec::power(1.0));
    double previous = 0;
    for (double alpha : {1.0, 0.8, 0.6, 0.4, 0.2}) {
      in.cost = CostSpec::power(alpha);
      const double e = solve(in, 1).energy;
      CHECK(e >= -1e-12);
      CHECK(e >= previous - 1e-9);
      previous = e;
    }
  }
}

TEST_CASE("oracle_small") {
  SUBCASE("alpha = 1 is the straight transport") {
    const auto in = y_instance(CostSpec::power(1.0));
    CHECK(oracle_small(in, 1e-3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  }
  SUBCASE("size counterexample") { CHECK(std::abs(oracle_small(counterexample(4), 1e-3) - kSqrt17Over4) <= 1e-6); }
  SUBCASE("budget") { CHECK_THROWS_AS(oracle_small(counterexample(4), 1e-5), Error); }
}
