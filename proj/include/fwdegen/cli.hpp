#pragma once
// Command-line front end. Every run resolves all options into a RunSpec,
// writes it back as manifest.txt and then the command's tables.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fwdegen/config.hpp"
#include "fwdegen/model.hpp"
#include "fwdegen/table_io.hpp"

namespace fwdegen::cli {

enum class Command { validate, simulate, flow, control, lyapunov, action, costs, classify, invariant };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct RunSpec {
  Command command = Command::validate;
  Params params{};
  std::filesystem::path output;

  double dt = 1e-3;
  double t_final = 10.0;
  std::uint64_t seed = 1;
  std::size_t n_paths = 16;
  std::optional<double> delta;  // band half-width; default from the model
  std::size_t nodes = 400;
  double horizon = 10.0;
  double burn_in = 0.1;
  double x0 = 0.5;
  double y0 = 0.0;
  std::string method = "integral";  // integral | pathopt | both
  double w0 = 0.999;
  double radius = 3.0;
  std::string init = "stationary";  // stationary | fixed
  std::string control = "extremal";  // extremal | constant
  std::optional<double> gain;
  std::string kernels = "auto";
  std::size_t grid = 601;
  unsigned threads = 0;
  std::optional<double> alpha;
  std::string path_file;  // action: read the path instead of sampling the extremal
};

/// Applies per-command defaults, then the given keys. Unknown keys and
/// out-of-range options throw ConfigError. `output` is not part of kv.
RunSpec resolve(const config::KeyValues& kv, std::filesystem::path output);

/// Every resolved key, in a fixed order; parsing it back gives the same spec.
io::Record manifest(const RunSpec& spec);

/// Runs the command; returns 0, 2 (configuration), 3 (numerical) or 4 (I/O).
/// Failures also leave error.txt in the output directory when possible.
int run(const RunSpec& spec);

/// argv entry point: `fwdegen <command> [options]`.
int main_entry(int argc, char** argv);

}  // namespace fwdegen::cli
