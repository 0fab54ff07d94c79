#include <CLI11.hpp>
#include <cmath>
#include <iostream>

#include "branchpath/connector.hpp"
#include "branchpath/lab.hpp"

namespace bp = branchpath;
using nlohmann::json;

namespace {

constexpr int kPass = 0, kError = 1, kFail = 2;

struct Output {
  std::string path;

  void emit(const json& j) const {
    if (path.empty())
      std::cout << j.dump(2) << '\n';
    else
      bp::io::write_text(path, j.dump(2) + "\n");
  }
};

bp::Point parse_point(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

// Smallest axis-aligned cube around the points, with a margin.
bp::Cube bounding_cube(const std::vector<bp::Point>& pts) {
  if (pts.empty()) throw bp::Error(bp::ErrorKind::InvalidArgument, "no points to bound");
  bp::Point lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return bp::Cube((lo + hi) / 2, std::max((hi - lo).maxCoeff(), 1e-6) * 1.01);
}

std::vector<bp::Point> vertices(const bp::PolyhedralCurrent& t) {
  std::vector<bp::Point> out;
  for (const auto& e : t.edges()) {
    out.push_back(e.a);
    out.push_back(e.b);
  }
  return out;
}

// Lattice of step h whose points are integer multiples of h, covering both currents.
bp::Cube lattice_domain(const std::vector<bp::Point>& pts, double h) {
  if (pts.empty()) return bp::Cube::from_lower(bp::Point::Zero(2), 4 * h);
  bp::Point lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  bp::Point lower = ((lo / h).array().floor() - 1).matrix() * h;
  const double cells = std::ceil(((hi - lower) / h).maxCoeff()) + 1;
  return bp::Cube::from_lower(lower, cells * h);
}

int run_solve(const std::string& file, const Output& out) {
  const auto in = bp::io::instance_from_json(bp::io::read_json(file));
  const auto sol = bp::solve(in);
  const double defect = bp::atomwise_distance(bp::boundary(sol.current), in.mu_plus - in.mu_minus);
  json j = bp::io::to_json(sol, in.cost);
  j["boundary_defect"] = defect;
  out.emit(j);
  return defect <= 1e-9 ? kPass : kFail;
}

int run_connect(const std::string& mu_file, const std::string& nu_file, int k, double alpha,
                const std::vector<double>& center, double edge, const Output& out) {
  const auto mu = bp::io::measure_from_json(bp::io::read_json(mu_file));
  const auto nu = bp::io::measure_from_json(bp::io::read_json(nu_file));
  const bp::Cube q = [&] {
    if (!center.empty()) return bp::Cube(parse_point(center), edge);
    auto pts = mu.points();
    const auto more = nu.points();
    pts.insert(pts.end(), more.begin(), more.end());
    return bp::shift_grid_avoiding(bounding_cube(pts), std::span<const bp::Point>(pts), k);
  }();
  const auto cost = bp::CostSpec::power(alpha);
  const auto res = bp::connect(mu, nu, q, k, cost);
  const double h = bp::h_mass(res.current, cost);
  const double defect = bp::atomwise_distance(bp::boundary(res.current), mu - nu);
  out.emit({{"current", bp::io::to_json(res.current)},
            {"k", res.k},
            {"domain", bp::io::to_json(q)},
            {"h_mass", h},
            {"bound", res.bound},
            {"sigma", bp::io::to_json(res.sigma)},
            {"boundary_defect", defect}});
  return defect <= 1e-12 && h <= res.bound * (1 + 1e-12) ? kPass : kFail;
}

int run_slice(const std::string& file, const std::vector<double>& center, double radius, const Output& out) {
  const auto t = bp::io::current_from_json(bp::io::read_json(file));
  const bp::Point x = parse_point(center);
  const auto s = bp::slice(t, x, radius);
  const auto ball = bp::Region::sup_ball(x, radius);
  const auto expected = bp::boundary(bp::restrict_current(t, ball)) -
                        bp::restrict_to_sup_ball(bp::boundary(t), x, radius, bp::kGenericRadiusTol);
  const double defect = bp::atomwise_distance(s.measure(), expected);
  json j = bp::io::to_json(s);
  j["identity_defect"] = defect;
  out.emit(j);
  return defect <= 1e-9 ? kPass : kFail;
}

int run_decompose(const std::string& file, bool strip_cycles, const Output& out) {
  auto t = bp::io::current_from_json(bp::io::read_json(file));
  if (strip_cycles) t = bp::remove_cycles(t);
  const auto d = bp::good_decomposition(t);
  const double m = bp::mass(t);
  double weighted = 0, weight = 0;
  for (const auto& p : d.paths) {
    weighted += p.weight * p.length();
    weight += p.weight;
  }
  const double mass_defect = std::abs(m - weighted);
  const double boundary_defect = std::abs(bp::boundary(t).total_variation() - 2 * weight);
  const double round_trip = bp::edgewise_distance(bp::current_of(d), t);
  json j = bp::io::to_json(d);
  j["mass"] = m;
  j["mass_defect"] = mass_defect;
  j["boundary_defect"] = boundary_defect;
  j["round_trip_defect"] = round_trip;
  out.emit(j);
  const double scale = std::max(1.0, m);
  return mass_defect <= 1e-9 * scale && boundary_defect <= 1e-9 * scale && round_trip <= 1e-9 ? kPass : kFail;
}

int run_flatnorm(const std::string& a_file, const std::string& b_file, double mesh, bool certificate,
                 const std::vector<double>& center, double edge, const Output& out) {
  const auto a = bp::io::current_from_json(bp::io::read_json(a_file));
  const auto b = bp::io::current_from_json(bp::io::read_json(b_file));
  const bp::Cube domain = [&] {
    if (!center.empty()) return bp::Cube(parse_point(center), edge);
    auto pts = vertices(a);
    const auto more = vertices(b);
    pts.insert(pts.end(), more.begin(), more.end());
    return lattice_domain(pts, mesh);
  }();
  const bp::TriComplex c(domain, mesh);
  const bp::Chain chain =
      bp::rasterize(bp::snap_to_lattice(a, c), c) - bp::rasterize(bp::snap_to_lattice(b, c), c);
  const auto res = bp::flat_norm(chain, c);
  const double identity = (chain - res.r - c.boundary_matrix() * res.s).cwiseAbs().maxCoeff();
  const double duality = std::abs(res.value - res.dual_value);
  json j = {{"value", res.value},
            {"dual_value", res.dual_value},
            {"chain_mass", bp::chain_mass(chain, c)},
            {"mesh", mesh},
            {"domain", bp::io::to_json(domain)},
            {"certificate_defect", identity}};
  if (certificate) j["certificate"] = bp::io::to_json(res);
  out.emit(j);
  return identity <= 1e-9 && duality <= 1e-9 * std::max(1.0, res.value) ? kPass : kFail;
}

int run_lab(const std::string& kind, const std::string& file, std::string dir) {
  const json cfg = bp::io::read_json(file);
  if (dir.empty()) dir = cfg.value("output_dir", std::string("."));
  std::string csv;
  json summary;
  bool pass = false;
  if (kind == "counterexample") {
    const auto rep = bp::lab::run_counterexample(bp::lab::counterexample_config(cfg));
    csv = rep.csv(), summary = rep.summary(), pass = rep.pass;
  } else if (kind == "threshold") {
    const auto rep = bp::lab::run_threshold(bp::lab::threshold_config(cfg));
    csv = rep.csv(), summary = rep.summary(), pass = rep.pass;
  } else {
    const auto rep = bp::lab::run_stability(bp::lab::stability_config(cfg));
    csv = rep.csv(), summary = rep.summary(), pass = rep.pass;
  }
  const std::filesystem::path out(dir);
  bp::io::write_text(out / "report.csv", csv);
  bp::io::write_text(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branched transport toolkit"};
  app.require_subcommand(1);
  Output out;
  std::string a, b;
  int k = 4;
  double alpha = 0.5, radius = 0, mesh = 1.0 / 64, edge = 0;
  std::vector<double> center, domain_center;
  bool strip_cycles = false, certificate = false;
  std::string kind, out_dir;

  auto* solve = app.add_subcommand("solve", "Least-energy traffic path for an instance");
  solve->add_option("instance", a, "instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out.path, "write JSON here instead of stdout");

  auto* connect = app.add_subcommand("connect", "Dyadic connection between two measures");
  connect->add_option("mu", a)->required()->check(CLI::ExistingFile);
  connect->add_option("nu", b)->required()->check(CLI::ExistingFile);
  connect->add_option("--k", k, "grid level")->check(CLI::Range(0, 20));
  connect->add_option("--alpha", alpha, "power cost exponent")->check(CLI::Range(0.0, 1.0));
  connect->add_option("--domain-center", domain_center, "root cube center (default: shifted bounding cube)");
  connect->add_option("--domain-edge", edge, "root cube edge");
  connect->add_option("--out", out.path);

  auto* slice = app.add_subcommand("slice", "Slice a current by a sup-norm sphere");
  slice->add_option("current", a)->required()->check(CLI::ExistingFile);
  slice->add_option("--center", center)->required();
  slice->add_option("--radius", radius)->required()->check(CLI::PositiveNumber);
  slice->add_option("--out", out.path);

  auto* decompose = app.add_subcommand("decompose", "Good decomposition of an acyclic current");
  decompose->add_option("current", a)->required()->check(CLI::ExistingFile);
  decompose->add_flag("--remove-cycles", strip_cycles, "cancel cycles first");
  decompose->add_option("--out", out.path);

  auto* flat = app.add_subcommand("flatnorm", "Simplicial flat distance between two planar currents");
  flat->add_option("a", a)->required()->check(CLI::ExistingFile);
  flat->add_option("b", b)->required()->check(CLI::ExistingFile);
  flat->add_option("--mesh", mesh, "lattice step")->required()->check(CLI::PositiveNumber);
  flat->add_option("--domain-center", domain_center);
  flat->add_option("--domain-edge", edge);
  flat->add_flag("--certificate", certificate, "include the optimal R and S");
  flat->add_option("--out", out.path);

  auto* lab = app.add_subcommand("lab", "Stability experiments; writes report.csv and summary.json");
  lab->add_option("kind", kind)->required()->check(CLI::IsMember({"counterexample", "threshold", "stability"}));
  lab->add_option("config", a)->required()->check(CLI::ExistingFile);
  lab->add_option("--out-dir", out_dir, "output directory (default: config output_dir or .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  }
  if (!domain_center.empty() && !(edge > 0)) {
    std::cerr << "--domain-edge must be positive when --domain-center is given\n";
    return kError;
  }

  try {
    if (*solve) return run_solve(a, out);
    if (*connect) return run_connect(a, b, k, alpha, domain_center, edge, out);
    if (*slice) return run_slice(a, center, radius, out);
    if (*decompose) return run_decompose(a, strip_cycles, out);
    if (*flat) return run_flatnorm(a, b, mesh, certificate, domain_center, edge, out);
    return run_lab(kind, a, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
