#pragma once

#include <optional>
#include <string>
#include <vector>

#include "branchpath/io.hpp"

namespace branchpath::lab {

using nlohmann::json;

/// One report row per perturbed instance T_n.
struct StabilityRow {
  double n = 0;
  double energy = 0;           // M(T_n), T_n the solver output
  double optimal_energy = 0;   // W(mu-_n, mu+_n)
  double flat_distance = 0;    // simplicial F(T_n - T_limit)
  double w1_marginals = 0;     // W1(mu-_n, mu-) + W1(mu+_n, mu+)
  double limit_energy = 0;     // M(T_limit)
  double limit_optimum = 0;    // W(mu-, mu+)
  double gap = 0;              // limit_energy - limit_optimum
};

struct StabilityReport {
  std::string experiment;
  std::vector<StabilityRow> rows;
  double gap = 0;
  double tolerance = 0;
  bool stable = true;                 // gap within tolerance
  bool pass = true;                   // verdict of the run
  std::vector<std::string> failures;  // checks that did not hold
  json extra = json::object();

  std::string csv() const;
  json summary() const;
};

struct CounterexampleConfig {
  std::vector<int> n{2, 4, 8, 16};
  double mesh = 1.0 / 64;
  Cube domain{Point{{0.5, 0.0}}, 2.0};
  double tolerance = 1e-6;
  int max_steiner = 2;
};

/// mu- = delta_0, mu+_n = (1/n) delta_p + (1 - 1/n) delta_e1 with
/// p = (1/2, 1/8) under the size cost. PASS when every W(mu-_n, mu+_n)
/// equals the minimal tree length, the limit current I_g1 + I_g2 has that
/// energy, the segment 0 -> e1 has energy 1, the gap is positive and the
/// flat distances to the limit decrease in n. The stability flag is FAIL
/// whenever the gap exceeds the tolerance.
StabilityReport run_counterexample(const CounterexampleConfig& config);

struct ThresholdRow {
  double alpha = 0;
  std::vector<double> costs;
  double ratio = 0;      // geometric mean of consecutive level ratios
  double predicted = 0;  // 2^(d(1-alpha)-1)
  double relative_error = 0;
  double partial_sum = 0;
  double closed_form = 0;  // costs[0] / (1 - ratio) when summable
  std::string classification;
  std::string expected;
  bool ok = false;
};

struct ThresholdConfig {
  std::vector<double> alphas{0.4, 0.5, 0.75};
  int d = 2;
  int kmax = 8;
  double tolerance = 0.10;
};

struct ThresholdReport {
  ThresholdConfig config;
  std::vector<ThresholdRow> rows;
  bool pass = true;

  std::string csv() const;
  json summary() const;
};

/// Dyadic chain costs of the uniform measure on the level-kmax cell centers
/// of the unit cube. Throws BudgetExceeded beyond 2^20 atoms.
ThresholdReport run_threshold(const ThresholdConfig& config);

struct Family {
  double n = 0;
  SignedAtomicMeasure mu_minus;
  SignedAtomicMeasure mu_plus;
};

struct StabilityConfig {
  CostSpec cost = CostSpec::power(0.75);
  std::vector<Family> family;
  SignedAtomicMeasure limit_minus;
  SignedAtomicMeasure limit_plus;
  std::optional<PolyhedralCurrent> limit_current;
  bool counterexample_family = false;
  Cube domain{Point{{0.5, 0.0}}, 2.0};
  double mesh = 1.0 / 64;
  double tolerance = 1e-3;
  int max_steiner = 2;
};

/// Solves every perturbed instance and the limit instance. The limit
/// candidate is the configured limit_current, else the explicit
/// I_g1 + I_g2 for the counterexample family under the size cost, else the
/// solver output on the limit instance. PASS iff the candidate's energy is
/// within tolerance of the limit optimum.
StabilityReport run_stability(const StabilityConfig& config);

CounterexampleConfig counterexample_config(const json& j);
ThresholdConfig threshold_config(const json& j);
StabilityConfig stability_config(const json& j);

/// The counterexample marginals for a given n.
Family counterexample_family(double n);

}  // namespace branchpath::lab
