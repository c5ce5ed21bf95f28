#pragma once
// Delimited-text output. Every table has a header row and every number is
// printed with 17 significant digits, so files round-trip exactly.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fwdegen/action.hpp"
#include "fwdegen/quasipotential.hpp"
#include "fwdegen/simulate.hpp"

namespace fwdegen::io {

std::string format_number(double v);

/// Writes `text` to `path`; throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string trajectory_table(const Trajectory& t);          // t,x,y
std::string scalar_path_table(const ScalarPath& p);         // t,w
std::string occupation_table(const OccupationHistogram& h);  // region,time,fraction

/// Rows and columns labelled K1,K2,K3; infinite entries print as "inf".
/// A nonempty `disagreement` adds one column with a value per row.
std::string cost_table(const CostMatrix& cm, const std::vector<double>& disagreement = {});
std::string well_cost_table(const WellCosts& w);  // well,W,argmin

using Record = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines.
std::string record_text(const Record& r);

/// Parses a `t,w` table with header. Throws ConfigError on malformed input.
ScalarPath parse_scalar_path(const std::string& text);

}  // namespace fwdegen::io
