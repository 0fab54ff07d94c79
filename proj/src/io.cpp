#include "branchpath/io.hpp"

#include <fstream>
#include <sstream>

namespace branchpath::io {
namespace {

// Runs f and reports any JSON access error as a parse error.
template <typename F>
auto parsing(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

Point point_from_json(const json& j) {
  return parsing("point", [&] {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::Parse, "point must be a non-empty array");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    return p;
  });
}

json to_json(const Point& p) {
  json j = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) j.push_back(p[i]);
  return j;
}

SignedAtomicMeasure measure_from_json(const json& j) {
  return parsing("measure", [&] {
    std::vector<Atom> raw;
    for (const auto& a : j.at("atoms")) raw.push_back({point_from_json(a.at("x")), a.at("w").get<double>()});
    return canonicalize(std::move(raw));
  });
}

json to_json(const SignedAtomicMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"x", to_json(a.x)}, {"w", a.w}});
  return {{"atoms", atoms}};
}

PolyhedralCurrent current_from_json(const json& j) {
  return parsing("current", [&] {
    std::vector<Segment> raw;
    for (const auto& e : j.at("edges"))
      raw.push_back({point_from_json(e.at("a")), point_from_json(e.at("b")), e.at("theta").get<double>()});
    return canonicalize(std::move(raw));
  });
}

json to_json(const PolyhedralCurrent& t) {
  json edges = json::array();
  for (const auto& e : t.edges()) edges.push_back({{"a", to_json(e.a)}, {"b", to_json(e.b)}, {"theta", e.theta}});
  return {{"edges", edges}};
}

PathDecomposition decomposition_from_json(const json& j) {
  return parsing("decomposition", [&] {
    PathDecomposition d;
    for (const auto& p : j.at("paths")) {
      WeightedPath path;
      for (const auto& v : p.at("vertices")) path.vertices.push_back(point_from_json(v));
      path.weight = p.at("w").get<double>();
      if (path.vertices.size() < 2) throw Error(ErrorKind::Parse, "a path needs at least two vertices");
      d.paths.push_back(std::move(path));
    }
    return d;
  });
}

json to_json(const PathDecomposition& d) {
  json paths = json::array();
  for (const auto& p : d.paths) {
    json vs = json::array();
    for (const auto& v : p.vertices) vs.push_back(to_json(v));
    paths.push_back({{"vertices", vs}, {"w", p.weight}});
  }
  return {{"paths", paths}};
}

CostSpec cost_from_json(const json& j) {
  return parsing("cost", [&] {
    if (j.contains("power")) return CostSpec::power(j.at("power").get<double>());
    if (j.contains("size") && j.at("size").get<bool>()) return CostSpec::size();
    throw Error(ErrorKind::Parse, "cost must be {\"power\": a} or {\"size\": true}");
  });
}

json to_json(const CostSpec& c) {
  switch (c.kind()) {
    case CostSpec::Kind::Power:
      return {{"power", c.alpha()}};
    case CostSpec::Kind::Size:
      return {{"size", true}};
    case CostSpec::Kind::General:
      break;
  }
  return {{"general", true}};
}

Cube cube_from_json(const json& j) {
  return parsing("domain", [&] { return Cube(point_from_json(j.at("center")), j.at("edge").get<double>()); });
}

json to_json(const Cube& q) { return {{"center", to_json(q.center())}, {"edge", q.edge()}}; }

TransportInstance instance_from_json(const json& j) {
  return parsing("instance", [&] {
    TransportInstance in;
    in.d = j.at("d").get<int>();
    in.cost = cost_from_json(j.at("cost"));
    in.mu_minus = measure_from_json(j.at("mu_minus"));
    in.mu_plus = measure_from_json(j.at("mu_plus"));
    in.domain = cube_from_json(j.at("domain"));
    in.max_steiner = j.value("max_steiner", 2);
    validate(in);
    return in;
  });
}

json to_json(const Solution& s, const CostSpec& cost) {
  json steiner = json::array();
  for (const auto& p : s.steiner) steiner.push_back(to_json(p));
  json topo = json::array();
  for (const auto& e : s.topology.edges) topo.push_back({{"from", e.from}, {"to", e.to}, {"flow", e.flow}});
  return {{"energy", s.energy},
          {"cost", to_json(cost)},
          {"current", to_json(s.current)},
          {"steiner", steiner},
          {"topology", {{"sources", s.topology.sources}, {"sinks", s.topology.sinks}, {"steiner", s.topology.steiner}, {"edges", topo}}},
          {"topologies_examined", s.topologies},
          {"optimality", s.optimality == Optimality::ExactOverEnumeration ? "exact-over-enumeration" : "heuristic"}};
}

json to_json(const ZeroSlice& s) {
  json atoms = json::array();
  for (const auto& a : s.atoms) atoms.push_back({{"x", to_json(a.x)}, {"sign", a.sign}, {"magnitude", a.magnitude}});
  return {{"atoms", atoms}, {"measure", to_json(s.measure())}};
}

json to_json(const FlatNormResult& r) {
  json rs = json::array(), ss = json::array();
  for (Eigen::Index e = 0; e < r.r.size(); ++e)
    if (r.r(e) != 0) rs.push_back({{"edge", e}, {"coefficient", r.r(e)}});
  for (Eigen::Index t = 0; t < r.s.size(); ++t)
    if (r.s(t) != 0) ss.push_back({{"triangle", t}, {"coefficient", r.s(t)}});
  return {{"value", r.value}, {"dual_value", r.dual_value}, {"certificate", {{"R", rs}, {"S", ss}}}};
}

}  // namespace branchpath::io
