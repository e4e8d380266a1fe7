#pragma once

#include <string>

#include "json.hpp"
#include "kplane/grid.hpp"
#include "kplane/measures.hpp"
#include "kplane/transform.hpp"

namespace kplane {

using Json = nlohmann::json;

/// {"dim": d, "points": [row-major n x d], "weights": [n]}
Json measure_to_json(const Measure& mu);
Measure measure_from_json(const Json& j);

/// {"dim": d, "origin": [d], "spacing": [d], "shape": [d], "values": [row-major]}
Json density_to_json(const GriddedDensity<double>& f);
GriddedDensity<double> density_from_json(const Json& j);
Json grid_function_to_json(const GridFunction<double>& f);
GridFunction<double> grid_function_from_json(const Json& j);

/// {"dim": d, "codim": m, "subspaces": [[row-major m x d frame], ...],
///  "quad_weights": [...], "fibers": [{"kind": "measure", ...} | {"kind": "grid", ...}]}
Json kplane_data_to_json(const KPlaneData& data);
KPlaneData kplane_data_from_json(const Json& j);

Json frame_to_json(const SubspaceD& alpha);
SubspaceD frame_from_json(const Json& j, Eigen::Index dim);

/// Deterministic text: object keys sorted, numbers with 17 significant
/// digits, two-space indentation, trailing newline. Rejects non-finite numbers.
std::string canonical_dump(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Measure read_measure_file(const std::string& path);
void write_measure_file(const std::string& path, const Measure& mu);
GriddedDensity<double> read_density_file(const std::string& path);
void write_density_file(const std::string& path, const GriddedDensity<double>& f);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace kplane
