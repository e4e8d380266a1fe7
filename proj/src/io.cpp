#include "kplane/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kplane {

namespace {

std::vector<double> doubles(const Json& j, const char* key, const char* what) {
  require(j.contains(key), std::string(what) + ": missing field '" + key + "'");
  const auto& v = j.at(key);
  require(v.is_array(), std::string(what) + ": field '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    require(x.is_number(), std::string(what) + ": field '" + key + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::Index positive_int(const Json& j, const char* key, const char* what) {
  require(j.contains(key) && j.at(key).is_number_integer(), std::string(what) + ": field '" + key + "' must be an integer");
  const auto v = j.at(key).get<long long>();
  require(v >= 1, std::string(what) + ": field '" + key + "' must be positive");
  return static_cast<Eigen::Index>(v);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RegularGrid<double> grid_from_json(const Json& j, const char* what) {
  const auto d = positive_int(j, "dim", what);
  const auto origin = doubles(j, "origin", what);
  const auto spacing = doubles(j, "spacing", what);
  require(j.contains("shape") && j.at("shape").is_array(), std::string(what) + ": field 'shape' must be an array");
  std::vector<Eigen::Index> shape;
  for (const auto& s : j.at("shape")) {
    require(s.is_number_integer() && s.get<long long>() >= 1, std::string(what) + ": shape entries must be positive integers");
    shape.push_back(static_cast<Eigen::Index>(s.get<long long>()));
  }
  require(static_cast<Eigen::Index>(origin.size()) == d && static_cast<Eigen::Index>(spacing.size()) == d &&
              static_cast<Eigen::Index>(shape.size()) == d,
          std::string(what) + ": origin, spacing and shape must have dim entries");
  return RegularGrid<double>(to_vector(origin), to_vector(spacing), shape);
}

Json grid_json(const RegularGrid<double>& g) {
  Json out;
  out["dim"] = g.dim();
  out["origin"] = vector_json(g.origin());
  out["spacing"] = vector_json(g.spacing());
  out["shape"] = g.shape();
  return out;
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool scalars = std::all_of(j.begin(), j.end(), [](const Json& x) { return x.is_primitive(); });
      if (scalars) {
        out += "[";
        bool first = true;
        for (const auto& x : j) {
          if (!first) out += ", ";
          first = false;
          dump(x, out, indent + 2);
        }
        out += "]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& x : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        dump(x, out, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      require(std::isfinite(v), "canonical_dump: non-finite number");
      char buffer[40];
      std::snprintf(buffer, sizeof buffer, "%.17g", v);
      std::string text(buffer);
      if (text.find_first_of(".eE") == std::string::npos) text += ".0";
      out += text;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

Json measure_to_json(const Measure& mu) {
  Json out;
  out["dim"] = mu.dim();
  Json points = Json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    for (Eigen::Index a = 0; a < mu.dim(); ++a) points.push_back(mu.points()(a, i));
  out["points"] = std::move(points);
  out["weights"] = vector_json(mu.weights());
  return out;
}

Measure measure_from_json(const Json& j) {
  require(j.is_object(), "measure file: expected an object");
  const auto d = positive_int(j, "dim", "measure file");
  const auto points = doubles(j, "points", "measure file");
  const auto weights = doubles(j, "weights", "measure file");
  const auto n = static_cast<Eigen::Index>(weights.size());
  require(n >= 1, "measure file: need at least one atom");
  require(static_cast<Eigen::Index>(points.size()) == n * d, "measure file: points must hold dim * n numbers");
  Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(points.data(), d, n);
  return Measure(std::move(x), to_vector(weights));
}

Json grid_function_to_json(const GridFunction<double>& f) {
  Json out = grid_json(f.grid);
  out["values"] = vector_json(f.values);
  return out;
}

GridFunction<double> grid_function_from_json(const Json& j) {
  require(j.is_object(), "grid file: expected an object");
  auto grid = grid_from_json(j, "grid file");
  const auto values = doubles(j, "values", "grid file");
  require(static_cast<Eigen::Index>(values.size()) == grid.size(), "grid file: values must hold prod(shape) numbers");
  return GridFunction<double>(std::move(grid), to_vector(values));
}

Json density_to_json(const GriddedDensity<double>& f) { return grid_function_to_json(f.function()); }

GriddedDensity<double> density_from_json(const Json& j) {
  auto f = grid_function_from_json(j);
  return GriddedDensity<double>(std::move(f.grid), std::move(f.values));
}

Json frame_to_json(const SubspaceD& alpha) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < alpha.codim(); ++r)
    for (Eigen::Index c = 0; c < alpha.dim(); ++c) out.push_back(alpha.frame()(r, c));
  return out;
}

SubspaceD frame_from_json(const Json& j, Eigen::Index dim) {
  require(j.is_array() && !j.empty() && j.size() % static_cast<std::size_t>(dim) == 0,
          "frame: expected a row-major list of (d - k) * d numbers");
  const auto rows = static_cast<Eigen::Index>(j.size()) / dim;
  Eigen::MatrixXd frame(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) frame(r, c) = j.at(static_cast<std::size_t>(r * dim + c)).get<double>();
  return SubspaceD(std::move(frame));
}

Json kplane_data_to_json(const KPlaneData& data) {
  Json out;
  out["dim"] = data.subspaces.front().dim();
  out["codim"] = data.subspaces.front().codim();
  out["quad_weights"] = vector_json(data.quad_weights);
  Json frames = Json::array();
  Json fibers = Json::array();
  for (std::size_t j = 0; j < data.size(); ++j) {
    frames.push_back(frame_to_json(data.subspaces[j]));
    Json fiber = std::visit(
        [](const auto& value) -> Json {
          using T = std::decay_t<decltype(value)>;
          if constexpr (std::is_same_v<T, Measure>) {
            Json m = measure_to_json(value);
            m["kind"] = "measure";
            return m;
          } else {
            Json g = grid_function_to_json(value);
            g["kind"] = "grid";
            return g;
          }
        },
        data.fibers[j]);
    fibers.push_back(std::move(fiber));
  }
  out["subspaces"] = std::move(frames);
  out["fibers"] = std::move(fibers);
  return out;
}

KPlaneData kplane_data_from_json(const Json& j) {
  require(j.is_object(), "k-plane data: expected an object");
  const auto d = positive_int(j, "dim", "k-plane data");
  require(j.contains("subspaces") && j.contains("fibers"), "k-plane data: missing subspaces or fibers");
  std::vector<SubspaceD> nodes;
  for (const auto& f : j.at("subspaces")) nodes.push_back(frame_from_json(f, d));
  std::vector<Fiber> fibers;
  for (const auto& f : j.at("fibers")) {
    const auto kind = f.value("kind", std::string());
    if (kind == "measure") {
      fibers.emplace_back(measure_from_json(f));
    } else if (kind == "grid") {
      fibers.emplace_back(grid_function_from_json(f));
    } else {
      throw Error("k-plane data: fiber kind must be 'measure' or 'grid'");
    }
  }
  return KPlaneData(std::move(nodes), std::move(fibers), to_vector(doubles(j, "quad_weights", "k-plane data")));
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '" + path + "'");
  out << text;
  out.flush();
  require(out.good(), "write to '" + path + "' failed");
}

Measure read_measure_file(const std::string& path) { return measure_from_json(read_json_file(path)); }

void write_measure_file(const std::string& path, const Measure& mu) {
  write_text_file(path, canonical_dump(measure_to_json(mu)));
}

GriddedDensity<double> read_density_file(const std::string& path) { return density_from_json(read_json_file(path)); }

void write_density_file(const std::string& path, const GriddedDensity<double>& f) {
  write_text_file(path, canonical_dump(density_to_json(f)));
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace kplane
