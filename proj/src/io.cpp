#include "opensub/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opensub/errors.hpp"

namespace opensub::io {

namespace {

double number_at(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field + ": expected a number");
  return j.get<double>();
}

Eigen::Index dimension_at(const Json& root, const char* key) {
  if (!root.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  const Json& j = root.at(key);
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError(std::string(key) + ": expected a non-negative integer");
  }
  return static_cast<Eigen::Index>(j.get<long long>());
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(); }

Json distances(const std::vector<NamedDistance>& list) {
  Json out = Json::array();
  for (const auto& d : list) {
    out.push_back({{"name", d.name}, {"distance", d.value}});
  }
  return out;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field,
                        Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) throw ParseError(field + ": expected an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows) {
    throw ParseError(field + ": expected " + std::to_string(rows) +
                     " rows, found " + std::to_string(j.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string where = field + "[" + std::to_string(r) + "]";
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(where + ": expected " + std::to_string(cols) +
                       " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::string cell = where + "[" + std::to_string(c) + "]";
      const Json& z = row[static_cast<std::size_t>(c)];
      if (!z.is_array() || z.size() != 2) {
        throw ParseError(cell + ": expected a [re, im] pair");
      }
      m(r, c) = Complex(number_at(z[0], cell + ".re"),
                        number_at(z[1], cell + ".im"));
    }
  }
  return m;
}

Json system_to_json(const BlockSystem& sys) {
  Json j;
  j["d1"] = sys.d1();
  j["d2"] = sys.d2();
  j["tol"] = sys.tol();
  j["omega1"] = matrix_to_json(sys.omega1());
  j["omega2"] = matrix_to_json(sys.omega2());
  j["gamma"] = matrix_to_json(sys.gamma());
  return j;
}

BlockSystem system_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("system file: expected a JSON object");
  const Eigen::Index d1 = dimension_at(j, "d1");
  const Eigen::Index d2 = dimension_at(j, "d2");
  double tol = kDefaultTol;
  if (j.contains("tol")) tol = number_at(j.at("tol"), "tol");
  if (!(tol > 0.0)) throw ParseError("tol: must be positive");
  for (const char* key : {"omega1", "omega2", "gamma"}) {
    if (!j.contains(key)) {
      throw ParseError(std::string("missing field '") + key + "'");
    }
  }
  Matrix omega1 = matrix_from_json(j.at("omega1"), "omega1", d1, d1);
  Matrix omega2 = matrix_from_json(j.at("omega2"), "omega2", d2, d2);
  Matrix gamma = matrix_from_json(j.at("gamma"), "gamma", d1, d2);
  try {
    return BlockSystem(std::move(omega1), std::move(omega2), std::move(gamma),
                       tol);
  } catch (const SymmetryViolation& e) {
    throw ParseError(e.what());
  }
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

BlockSystem read_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return system_from_json(parse(buf.str()));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Json lattice_metadata(const LatticeSpec& spec) {
  Json j;
  j["box"] = spec.box;
  j["cube"] = spec.cube;
  j["offset"] = Json::array();
  for (int k = 0; k < spec.dims; ++k) {
    j["offset"].push_back(spec.offset[static_cast<std::size_t>(k)]);
  }
  j["dims"] = spec.dims;
  j["interior"] = spec.interior();
  j["surface_count"] = surface_count(spec.cube, spec.dims);
  j["multiplicity_bound"] = multiplicity_bound(spec.cube, spec.dims);
  return j;
}

Json decomposition_report(const BlockSystem& sys,
                          const FourWayDecomposition& dec, double block_form) {
  Json j;
  j["tol"] = dec.tol;
  j["d1"] = sys.d1();
  j["d2"] = sys.d2();
  j["dims"] = {{"h1d", dec.h1d.dim()},
               {"h1c", dec.h1c.dim()},
               {"h2c", dec.h2c.dim()},
               {"h2d", dec.h2d.dim()}};
  j["route_distances"] = {{"h1c", dec.h1c_route_distance},
                          {"h2c", dec.h2c_route_distance}};
  j["block_form_residual"] = block_form;
  j["omega_norm"] = operator_norm(assemble_full(sys).omega);
  j["reconstructible"] = dec.h1d.dim() == 0 && dec.h2d.dim() == 0;
  j["bases"] = {{"h1d", matrix_to_json(dec.h1d.matrix())},
                {"h1c", matrix_to_json(dec.h1c.matrix())},
                {"h2c", matrix_to_json(dec.h2c.matrix())},
                {"h2d", matrix_to_json(dec.h2d.matrix())}};
  j["restricted"] = {{"omega1d", matrix_to_json(dec.omega1d)},
                     {"omega1c", matrix_to_json(dec.omega1c)},
                     {"omega2c", matrix_to_json(dec.omega2c)},
                     {"omega2d", matrix_to_json(dec.omega2d)},
                     {"gamma_c", matrix_to_json(dec.gamma_c)}};
  return j;
}

Json theorem_report(const TheoremReport& r) {
  Json j;
  j["tol"] = r.tol;
  j["cluster_tol"] = r.cluster_tol;
  j["threshold"] = r.threshold;
  j["dims"] = {{"h1d", r.dim_h1d},
               {"h1c", r.dim_h1c},
               {"h2c", r.dim_h2c},
               {"h2d", r.dim_h2d}};
  j["orbit_equalities"] = distances(r.orbit_equalities);
  j["proof_chain"] = distances(r.proof_chain);
  j["max_equality_distance"] = r.max_equality_distance();
  j["block_form_residual"] = r.block_form_residual;
  j["omega_norm"] = r.omega_norm;
  j["rank_gamma"] = r.rank_gamma;
  j["multiplicity_omega_c"] = r.multiplicity_omega_c;
  j["bound"] = r.bound;
  j["bound_satisfied"] = r.bound_satisfied;
  j["reconstructible_core"] = r.reconstructible_core;
  j["clusters"] = {
      {"sizes", r.omega_c_clusters.sizes},
      {"threshold", r.omega_c_clusters.threshold},
      {"largest_merged_gap", r.omega_c_clusters.largest_merged_gap},
      {"smallest_split_gap",
       finite_or_null(r.omega_c_clusters.smallest_split_gap)}};
  j["passed"] = r.passed();
  return j;
}

Json lattice_report(const LatticeReport& r) {
  Json j;
  j["lattice"] = lattice_metadata(r.spec);
  j["surface_sites_counted"] = r.surface_sites;
  j["rank_gamma"] = r.rank_gamma;
  j["rank_equals_surface"] = r.rank_equals_surface;
  j["rank_within_surface"] = r.rank_within_surface;
  j["multiplicity_within_bound"] = r.multiplicity_within_bound;
  j["hidden_decoupled_nonzero"] = r.hidden_decoupled_nonzero;
  j["theorem"] = theorem_report(r.theorem);
  j["passed"] = r.passed();
  return j;
}

Json no_gain_report(const NoGainResult& result, const TimeGrid& grid,
                    KernelSide side, int trials, std::uint64_t seed,
                    double tol) {
  Json j;
  j["tol"] = tol;
  j["side"] = side == KernelSide::observable ? "observable" : "hidden";
  j["trials"] = trials;
  j["seed"] = seed;
  j["t_max"] = grid.t_max();
  j["steps"] = grid.steps();
  j["min_value"] = result.min_value;
  j["epsilon_quad"] = result.epsilon_quad;
  j["negative_excursion"] = result.negative_excursion;
  Json values = Json::array();
  for (const auto& t : result.trials) {
    values.push_back({{"value", t.value},
                      {"quadrature_bound", t.quadrature_bound},
                      {"roundoff_bound", t.roundoff_bound}});
  }
  j["values"] = std::move(values);
  j["passed"] = result.passed();
  return j;
}

Json comparison_report(const ReductionComparison& cmp, const TimeGrid& grid,
                       double tol) {
  Json j;
  j["tol"] = tol;
  j["t_max"] = grid.t_max();
  j["steps"] = grid.steps();
  j["step"] = cmp.coarse_step;
  j["sup_error"] = cmp.coarse_error;
  j["sup_error_refined"] = cmp.fine_error;
  j["order"] = cmp.order;
  return j;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << contents;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace opensub::io
