#pragma once

#include <filesystem>
#include <json.hpp>

#include "branchpath/decomposition.hpp"
#include "branchpath/flatnorm.hpp"
#include "branchpath/solver.hpp"

namespace branchpath::io {

using nlohmann::json;

/// Reads and parses a JSON file; throws Error(Parse) on I/O or syntax errors.
json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

Point point_from_json(const json& j);
json to_json(const Point& p);

/// {"atoms":[{"x":[..],"w":..}]}
SignedAtomicMeasure measure_from_json(const json& j);
json to_json(const SignedAtomicMeasure& mu);

/// {"edges":[{"a":[..],"b":[..],"theta":..}]}
PolyhedralCurrent current_from_json(const json& j);
json to_json(const PolyhedralCurrent& t);

/// {"paths":[{"vertices":[[..],..],"w":..}]}
PathDecomposition decomposition_from_json(const json& j);
json to_json(const PathDecomposition& d);

/// {"power":a} or {"size":true}
CostSpec cost_from_json(const json& j);
json to_json(const CostSpec& c);

/// {"center":[..],"edge":..}
Cube cube_from_json(const json& j);
json to_json(const Cube& q);

/// {"d":2,"cost":..,"mu_minus":..,"mu_plus":..,"domain":..,"max_steiner":2};
/// validated on the way in.
TransportInstance instance_from_json(const json& j);

json to_json(const Solution& s, const CostSpec& cost);
json to_json(const ZeroSlice& s);
json to_json(const FlatNormResult& r);

}  // namespace branchpath::io
