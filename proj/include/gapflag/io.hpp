#pragma once

// JSON and CSV layouts shared by the library and the command-line tool.
// Complex matrices are row-major arrays of rows, each entry a [re, im] pair.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gapflag/density.hpp"
#include "gapflag/gkls.hpp"

namespace gapflag::io {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const ComplexMatrix& m);
/// Throws ValidationError on ragged rows, non-square shape or malformed entries.
ComplexMatrix matrix_from_json(const Json& j);

Json vector_to_json(const RealVector& v);
RealVector vector_from_json(const Json& j);

/// {"n", "H", "jumps", "rates"}
Json model_to_json(const LindbladModel& model);
LindbladModel model_from_json(const Json& j);

/// {"rho": matrix} or {"r": [...], "U": matrix (optional, identity if absent)}.
DensityMatrix state_from_json(const Json& j);

/// Reads and parses a JSON file; IoError on open or parse failure.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

/// Provenance header written as "# key: value" lines ahead of CSV tables.
using Header = std::vector<std::pair<std::string, std::string>>;

/// Columns: t, r_1..r_{n-1}, purity_R, trace_error, min_gap. Values at 17
/// significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Header& header);

/// One JSON object per recorded time: {"t", "rho"} plus "U" for split records.
void write_trajectory_states(std::ostream& os, const Trajectory& traj);

/// Formats a double with 17 significant digits.
std::string format_double(double x);

}  // namespace gapflag::io
