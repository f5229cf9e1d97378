#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "opensub/decomposition.hpp"
#include "opensub/dynamics.hpp"
#include "opensub/lattice.hpp"
#include "opensub/system.hpp"

namespace opensub::io {

using Json = nlohmann::ordered_json;

// System file:
//   {"d1": 2, "d2": 3, "tol": 1e-10,
//    "omega1": [[[re, im], ...], ...],   // row-major, d1 x d1
//    "omega2": [...],                     // d2 x d2
//    "gamma":  [...]}                     // d1 x d2
// Doubles are written in shortest round-trip form, so write/read is
// bit-exact. Extra top-level fields (e.g. "lattice") are ignored on read.
Json system_to_json(const BlockSystem& sys);
// Throws ParseError naming the offending field.
BlockSystem system_from_json(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field,
                        Eigen::Index rows, Eigen::Index cols);

// Parses text; JSON syntax errors become ParseError with the byte offset.
Json parse(const std::string& text);
BlockSystem read_system_file(const std::string& path);

Json lattice_metadata(const LatticeSpec& spec);

Json decomposition_report(const BlockSystem& sys,
                          const FourWayDecomposition& dec, double block_form);
Json theorem_report(const TheoremReport& report);
Json lattice_report(const LatticeReport& report);
Json no_gain_report(const NoGainResult& result, const TimeGrid& grid,
                    KernelSide side, int trials, std::uint64_t seed,
                    double tol);
Json comparison_report(const ReductionComparison& cmp, const TimeGrid& grid,
                       double tol);

// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace opensub::io
