#include "branchpath/lab.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "branchpath/connector.hpp"

namespace branchpath::lab {
namespace {

const Point kP{{0.5, 0.125}};
const Point kOrigin{{0.0, 0.0}};
const Point kE1{{1.0, 0.0}};

// I_g1 + I_g2: 0 -> p -> e1 with unit multiplicity.
PolyhedralCurrent explicit_limit() { return polyline(std::vector<Point>{kOrigin, kP, kE1}); }

double flat_distance(const PolyhedralCurrent& a, const PolyhedralCurrent& b, const TriComplex& c) {
  const Chain chain = rasterize(snap_to_lattice(a, c), c) - rasterize(snap_to_lattice(b, c), c);
  return flat_norm(chain, c).value;
}

TransportInstance make_instance(const SignedAtomicMeasure& minus, const SignedAtomicMeasure& plus, const CostSpec& cost,
                                const Cube& domain, int max_steiner) {
  TransportInstance in;
  in.d = domain.dim();
  in.mu_minus = minus;
  in.mu_plus = plus;
  in.cost = cost;
  in.domain = domain;
  in.max_steiner = max_steiner;
  return in;
}

std::string number(double v) {
  std::ostringstream s;
  s << std::setprecision(15) << v;
  return s.str();
}

// Independent instances run concurrently; results come back in input order.
template <typename Range, typename F>
auto in_parallel(const Range& items, F f) {
  using Row = decltype(f(*std::begin(items)));
  std::vector<std::future<Row>> futures;
  for (const auto& item : items) futures.push_back(std::async(std::launch::async, f, std::cref(item)));
  std::vector<Row> out;
  for (auto& fu : futures) out.push_back(fu.get());
  return out;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Family counterexample_family(double n) {
  if (!(n >= 1)) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  Family f;
  f.n = n;
  f.mu_minus = dirac(kOrigin);
  f.mu_plus = n == 1 ? dirac(kP) : canonicalize(std::vector<Atom>{{kP, 1.0 / n}, {kE1, 1.0 - 1.0 / n}});
  return f;
}

std::string StabilityReport::csv() const {
  std::ostringstream s;
  s << "n,energy,optimal_energy,flat_distance,w1_marginals,limit_energy,limit_optimum,gap\n";
  for (const auto& r : rows)
    s << number(r.n) << ',' << number(r.energy) << ',' << number(r.optimal_energy) << ',' << number(r.flat_distance) << ','
      << number(r.w1_marginals) << ',' << number(r.limit_energy) << ',' << number(r.limit_optimum) << ',' << number(r.gap)
      << '\n';
  return s.str();
}

json StabilityReport::summary() const {
  json j = {{"experiment", experiment},
            {"verdict", pass ? "PASS" : "FAIL"},
            {"stability", stable ? "PASS" : "FAIL"},
            {"gap", gap},
            {"tolerance", tolerance},
            {"rows", rows.size()},
            {"failures", failures},
            {"note", "desk-scale evidence for the scripted limit candidate, not a proof"}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

StabilityReport run_counterexample(const CounterexampleConfig& cfg) {
  const auto size = CostSpec::size();
  const TriComplex complex(cfg.domain, cfg.mesh);
  const auto limit = explicit_limit();
  const double tree = kP.norm() + (kE1 - kP).norm();  // length of the minimal tree through 0, p, e1

  StabilityReport rep;
  rep.experiment = "counterexample";
  rep.tolerance = cfg.tolerance;
  const double limit_energy = h_mass(limit, size);
  const auto segment = solve(make_instance(dirac(kOrigin), dirac(kE1), size, cfg.domain, cfg.max_steiner));
  rep.gap = limit_energy - segment.energy;
  rep.stable = rep.gap <= cfg.tolerance;

  auto check = [&](bool ok, const std::string& what) {
    if (!ok) rep.failures.push_back(what);
  };
  check(std::abs(limit_energy - tree) <= cfg.tolerance, "limit current energy differs from the minimal tree length");
  check(std::abs(segment.energy - 1.0) <= cfg.tolerance, "segment competitor energy differs from 1");
  check(rep.gap > cfg.tolerance, "no positive gap between the limit energy and the limit optimum");

  std::vector<int> ns = cfg.n;
  std::sort(ns.begin(), ns.end());
  for (int n : ns)
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "counterexample needs n >= 2");
  auto solve_row = [&](int n) {
    const auto fam = counterexample_family(n);
    const auto sol = solve(make_instance(fam.mu_minus, fam.mu_plus, size, cfg.domain, cfg.max_steiner));
    StabilityRow row;
    row.n = n;
    row.energy = h_mass(sol.current, size);
    row.optimal_energy = sol.energy;
    row.flat_distance = flat_distance(sol.current, limit, complex);
    row.w1_marginals = w1_distance(fam.mu_plus, dirac(kE1));
    row.limit_energy = limit_energy;
    row.limit_optimum = segment.energy;
    row.gap = rep.gap;
    return row;
  };
  double deviation = 0;
  for (auto& row : in_parallel(ns, solve_row)) {
    const std::string n = std::to_string(static_cast<int>(row.n));
    deviation = std::max(deviation, std::abs(row.optimal_energy - tree));
    check(std::abs(row.optimal_energy - tree) <= cfg.tolerance, "W(mu-_" + n + ", mu+_" + n + ") differs from the minimal tree length");
    if (!rep.rows.empty() && !(row.flat_distance < rep.rows.back().flat_distance))
      rep.failures.push_back("flat distance does not decrease at n = " + n);
    rep.rows.push_back(row);
  }
  rep.pass = rep.failures.empty();
  rep.extra = {{"minimal_tree_length", tree},
               {"limit_energy", limit_energy},
               {"segment_energy", segment.energy},
               {"max_deviation", deviation},
               {"mesh", cfg.mesh}};
  return rep;
}

std::string ThresholdReport::csv() const {
  std::ostringstream s;
  s << "alpha,level,cost\n";
  for (const auto& r : rows)
    for (std::size_t l = 0; l < r.costs.size(); ++l) s << number(r.alpha) << ',' << l << ',' << number(r.costs[l]) << '\n';
  return s.str();
}

json ThresholdReport::summary() const {
  json rs = json::array();
  for (const auto& r : rows)
    rs.push_back({{"alpha", r.alpha},
                  {"ratio", r.ratio},
                  {"predicted", r.predicted},
                  {"relative_error", r.relative_error},
                  {"partial_sum", r.partial_sum},
                  {"closed_form", r.closed_form},
                  {"classification", r.classification},
                  {"expected", r.expected},
                  {"ok", r.ok}});
  return {{"experiment", "threshold"},
          {"verdict", pass ? "PASS" : "FAIL"},
          {"d", config.d},
          {"kmax", config.kmax},
          {"tolerance", config.tolerance},
          {"threshold_alpha", 1.0 - 1.0 / config.d},
          {"rows", rs}};
}

ThresholdReport run_threshold(const ThresholdConfig& cfg) {
  if (cfg.d != 2 && cfg.d != 3) throw Error(ErrorKind::InvalidArgument, "threshold runs in dimension 2 or 3");
  if (cfg.kmax < 2 || cfg.kmax > 10) throw Error(ErrorKind::InvalidArgument, "kmax must lie in [2, 10]");
  if (cfg.d * cfg.kmax > 20) throw Error(ErrorKind::BudgetExceeded, "uniform measure would exceed 2^20 atoms");
  const Cube unit = Cube::from_lower(Point::Zero(cfg.d), 1.0);
  const Grid grid(unit, cfg.kmax);
  std::vector<Atom> raw;
  const double w = 1.0 / static_cast<double>(grid.cell_count());
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) raw.push_back({grid.cell(i).center(), w});
  const auto mu = canonicalize(std::move(raw));

  ThresholdReport rep;
  rep.config = cfg;
  for (double alpha : cfg.alphas) {
    if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    ThresholdRow row;
    row.alpha = alpha;
    row.costs = dyadic_connection_cost(mu, unit, cfg.kmax, CostSpec::power(alpha));
    row.ratio = std::pow(row.costs.back() / row.costs.front(), 1.0 / static_cast<double>(row.costs.size() - 1));
    const double exponent = cfg.d * (1 - alpha) - 1;
    row.predicted = std::exp2(exponent);
    row.relative_error = std::abs(row.ratio - row.predicted) / row.predicted;
    for (double c : row.costs) row.partial_sum += c;
    row.classification = row.ratio < 1 - 1e-9 ? "summable" : "diverging";
    row.expected = exponent < 0 ? "summable" : "diverging";
    row.closed_form = row.classification == "summable" ? row.costs.front() / (1 - row.ratio) : INFINITY;
    row.ok = row.relative_error <= cfg.tolerance && row.classification == row.expected;
    if (row.classification == "summable") row.ok = row.ok && row.partial_sum <= 1.05 * row.closed_form;
    rep.pass = rep.pass && row.ok;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

StabilityReport run_stability(const StabilityConfig& cfg) {
  if (cfg.family.empty()) throw Error(ErrorKind::InvalidArgument, "stability needs at least one instance");
  const TriComplex complex(cfg.domain, cfg.mesh);
  const auto limit_solution = solve(make_instance(cfg.limit_minus, cfg.limit_plus, cfg.cost, cfg.domain, cfg.max_steiner));

  PolyhedralCurrent candidate;
  std::string source;
  if (cfg.limit_current) {
    candidate = *cfg.limit_current;
    source = "configured";
  } else if (cfg.counterexample_family && cfg.cost.kind() == CostSpec::Kind::Size) {
    candidate = explicit_limit();
    source = "explicit curves";
  } else {
    candidate = limit_solution.current;
    source = "limit instance solution";
  }
  if (atomwise_distance(boundary(candidate), cfg.limit_plus - cfg.limit_minus) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "limit candidate does not connect the limit marginals");

  StabilityReport rep;
  rep.experiment = "stability";
  rep.tolerance = cfg.tolerance;
  const double limit_energy = h_mass(candidate, cfg.cost);
  rep.gap = limit_energy - limit_solution.energy;
  rep.stable = rep.gap <= cfg.tolerance;
  auto solve_row = [&](const Family& f) {
    const auto sol = solve(make_instance(f.mu_minus, f.mu_plus, cfg.cost, cfg.domain, cfg.max_steiner));
    StabilityRow row;
    row.n = f.n;
    row.energy = h_mass(sol.current, cfg.cost);
    row.optimal_energy = sol.energy;
    row.flat_distance = flat_distance(sol.current, candidate, complex);
    row.w1_marginals = w1_distance(f.mu_minus, cfg.limit_minus) + w1_distance(f.mu_plus, cfg.limit_plus);
    row.limit_energy = limit_energy;
    row.limit_optimum = limit_solution.energy;
    row.gap = rep.gap;
    return row;
  };
  double convergence = 0;
  for (auto& row : in_parallel(cfg.family, solve_row)) {
    if (row.optimal_energy > row.energy + 1e-12) rep.failures.push_back("optimal energy above the solved energy");
    convergence = std::abs(row.energy - row.limit_optimum);
    rep.rows.push_back(row);
  }
  if (!rep.stable) rep.failures.push_back("limit candidate energy exceeds the limit optimum");
  rep.pass = rep.failures.empty();
  rep.extra = {{"limit_candidate", source},
               {"limit_energy", limit_energy},
               {"limit_optimum", limit_solution.energy},
               {"last_energy_gap", convergence},
               {"mesh", cfg.mesh}};
  return rep;
}

CounterexampleConfig counterexample_config(const json& j) {
  try {
    CounterexampleConfig c;
    c.n = get_or(j, "n", c.n);
    c.mesh = get_or(j, "mesh", c.mesh);
    if (j.contains("domain")) c.domain = io::cube_from_json(j.at("domain"));
    c.tolerance = get_or(j, "tolerance", c.tolerance);
    c.max_steiner = get_or(j, "max_steiner", c.max_steiner);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("counterexample config: ") + e.what());
  }
}

ThresholdConfig threshold_config(const json& j) {
  try {
    ThresholdConfig c;
    c.alphas = get_or(j, "alphas", c.alphas);
    c.d = get_or(j, "d", c.d);
    c.kmax = get_or(j, "kmax", c.kmax);
    c.tolerance = get_or(j, "tolerance", c.tolerance);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("threshold config: ") + e.what());
  }
}

StabilityConfig stability_config(const json& j) {
  try {
    StabilityConfig c;
    c.cost = io::cost_from_json(j.at("cost"));
    c.mesh = get_or(j, "mesh", c.mesh);
    c.tolerance = get_or(j, "tolerance", c.tolerance);
    c.max_steiner = get_or(j, "max_steiner", c.max_steiner);
    if (j.contains("domain")) c.domain = io::cube_from_json(j.at("domain"));
    const std::string family = get_or<std::string>(j, "family", "explicit");
    if (family == "counterexample") {
      c.counterexample_family = true;
      for (double n : get_or(j, "n", std::vector<double>{2, 4, 8, 16})) c.family.push_back(counterexample_family(n));
      c.limit_minus = dirac(kOrigin);
      c.limit_plus = dirac(kE1);
    } else if (family == "explicit") {
      for (const auto& inst : j.at("instances"))
        c.family.push_back({inst.at("n").get<double>(), io::measure_from_json(inst.at("mu_minus")), io::measure_from_json(inst.at("mu_plus"))});
      c.limit_minus = io::measure_from_json(j.at("limit").at("mu_minus"));
      c.limit_plus = io::measure_from_json(j.at("limit").at("mu_plus"));
    } else {
      throw Error(ErrorKind::Parse, "family must be \"counterexample\" or \"explicit\"");
    }
    if (j.contains("limit_current")) c.limit_current = io::current_from_json(j.at("limit_current"));
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("stability config: ") + e.what());
  }
}

}  // namespace branchpath::lab
