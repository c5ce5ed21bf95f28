#include "fwdegen/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "fwdegen/action.hpp"
#include "fwdegen/errors.hpp"
#include "fwdegen/kernels.hpp"
#include "fwdegen/lyapunov.hpp"
#include "fwdegen/quasipotential.hpp"
#include "fwdegen/simulate.hpp"

namespace fwdegen::cli {

namespace fs = std::filesystem;
using io::format_number;

namespace {

constexpr const char* kCommands[] = {"validate", "simulate", "flow",     "control",  "lyapunov",
                                     "action",   "costs",    "classify", "invariant"};

const char* clause_name(Clause c) {
  switch (c) {
    case Clause::nonfinite: return "nonfinite";
    case Clause::nonpositive_rate: return "nonpositive_rate";
    case Clause::nonpositive_sigma0: return "nonpositive_sigma0";
    case Clause::sigma1_range: return "sigma1_range";
    case Clause::theta_range: return "theta_range";
    case Clause::theta_forbidden: return "theta_forbidden";
    case Clause::epsilon_range: return "epsilon_range";
  }
  return "unknown";
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_number(*v) : "auto"; }

std::optional<double> optional_value(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return config::to_double(key, v);
}

void require_choice(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return;
  }
  std::string msg = key + " must be one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + v + "'");
}

}  // namespace

Command parse_command(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kCommands); ++i) {
    if (name == kCommands[i]) return static_cast<Command>(i);
  }
  throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) { return kCommands[static_cast<std::size_t>(c)]; }

RunSpec resolve(const config::KeyValues& kv, fs::path output) {
  RunSpec s;
  s.output = std::move(output);
  const auto cmd = kv.find("command");
  if (cmd == kv.end()) throw ConfigError("no command given");
  s.command = parse_command(cmd->second);

  // per-command defaults
  switch (s.command) {
    case Command::invariant:
      s.t_final = 5000.0;
      break;
    case Command::action:
      s.nodes = 2001;
      break;
    default:
      break;
  }

  s.params = config::params_from(kv);
  bool x0_given = false;
  for (const auto& [key, v] : kv) {
    if (key == "command" || key == "lambda1" || key == "lambda2" || key == "lambda3" || key == "sigma0" ||
        key == "sigma1" || key == "theta" || key == "epsilon" || key == "epsilon0") {
      continue;
    } else if (key == "dt") {
      s.dt = config::to_double(key, v);
    } else if (key == "t_final") {
      s.t_final = config::to_double(key, v);
    } else if (key == "seed") {
      s.seed = config::to_uint(key, v);
    } else if (key == "n_paths") {
      s.n_paths = config::to_uint(key, v);
    } else if (key == "delta") {
      s.delta = optional_value(key, v);
    } else if (key == "nodes") {
      s.nodes = config::to_uint(key, v);
    } else if (key == "horizon") {
      s.horizon = config::to_double(key, v);
    } else if (key == "burn_in") {
      s.burn_in = config::to_double(key, v);
    } else if (key == "x0") {
      s.x0 = config::to_double(key, v);
      x0_given = true;
    } else if (key == "y0") {
      s.y0 = config::to_double(key, v);
    } else if (key == "method") {
      s.method = v;
    } else if (key == "w0") {
      s.w0 = config::to_double(key, v);
    } else if (key == "radius") {
      s.radius = config::to_double(key, v);
    } else if (key == "init") {
      s.init = v;
    } else if (key == "control") {
      s.control = v;
    } else if (key == "gain") {
      s.gain = optional_value(key, v);
    } else if (key == "kernels") {
      s.kernels = v;
    } else if (key == "grid") {
      s.grid = config::to_uint(key, v);
    } else if (key == "threads") {
      s.threads = static_cast<unsigned>(config::to_uint(key, v));
    } else if (key == "alpha") {
      s.alpha = optional_value(key, v);
    } else if (key == "path") {
      s.path_file = v == "none" ? std::string() : v;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (s.command == Command::control && s.control == "constant") {
    if (!s.delta) s.delta = 0.1;
    if (!x0_given) s.x0 = 1.0 + *s.delta;
  }
  if (s.command == Command::control && s.control == "extremal" && !x0_given) s.x0 = s.w0;

  require_choice("method", s.method, {"integral", "pathopt", "both"});
  require_choice("init", s.init, {"stationary", "fixed"});
  require_choice("control", s.control, {"extremal", "constant"});
  kernels::parse_backend(s.kernels);
  if (s.n_paths < 1) throw ConfigError("n_paths must be at least 1");
  if (s.nodes < 3) throw ConfigError("nodes must be at least 3");
  if (s.grid < 2) throw ConfigError("grid must be at least 2");
  if (!(s.burn_in >= 0.0 && s.burn_in < 1.0)) throw ConfigError("burn_in must lie in [0, 1[");
  if (!(s.radius > 0.0)) throw ConfigError("radius must be positive");
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) throw ConfigError("horizon must be positive");
  return s;
}

io::Record manifest(const RunSpec& s) {
  const Params& p = s.params;
  return {
      {"command", command_name(s.command)},
      {"lambda1", format_number(p.lambda1)},
      {"lambda2", format_number(p.lambda2)},
      {"lambda3", format_number(p.lambda3)},
      {"sigma0", format_number(p.sigma0)},
      {"sigma1", format_number(p.sigma1)},
      {"theta", format_number(p.theta)},
      {"epsilon", format_number(p.epsilon)},
      {"epsilon0", format_number(p.epsilon0)},
      {"dt", format_number(s.dt)},
      {"t_final", format_number(s.t_final)},
      {"seed", std::to_string(s.seed)},
      {"n_paths", std::to_string(s.n_paths)},
      {"delta", optional_text(s.delta)},
      {"nodes", std::to_string(s.nodes)},
      {"horizon", format_number(s.horizon)},
      {"burn_in", format_number(s.burn_in)},
      {"x0", format_number(s.x0)},
      {"y0", format_number(s.y0)},
      {"method", s.method},
      {"w0", format_number(s.w0)},
      {"radius", format_number(s.radius)},
      {"init", s.init},
      {"control", s.control},
      {"gain", optional_text(s.gain)},
      {"kernels", s.kernels},
      {"grid", std::to_string(s.grid)},
      {"threads", std::to_string(s.threads)},
      {"alpha", optional_text(s.alpha)},
      {"path", s.path_file.empty() ? "none" : s.path_file},
  };
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

Params require_valid(const Params& p) {
  auto v = validate_params(p);
  if (v.ok()) return *v.params;
  std::string msg = "invalid parameters:";
  for (const auto& c : v.violations) msg += std::string(" [") + clause_name(c.clause) + "] " + c.message + ";";
  throw ConfigError(msg);
}

SimConfig sim_config(const RunSpec& s) {
  SimConfig c;
  c.dt = s.dt;
  c.t_final = s.t_final;
  c.seed = s.seed;
  c.initial = {s.x0, s.y0};
  return c;
}

void put(const RunSpec& s, const char* name, const std::string& text) { io::write_text(s.output / name, text); }

void cmd_validate(const RunSpec& s) {
  const auto v = validate_params(s.params);
  std::string table = "clause,message\n";
  for (const auto& c : v.violations) table += std::string(clause_name(c.clause)) + ',' + c.message + '\n';
  put(s, "validation.csv", table);
  require_valid(s.params);
}

void cmd_simulate(const RunSpec& s, bool noise) {
  const Params p = require_valid(s.params);
  const auto c = sim_config(s);
  put(s, "trajectory.csv", io::trajectory_table(noise ? simulate_sde(p, c) : simulate_flow(p, c)));
}

void cmd_control(const RunSpec& s) {
  const Params p = require_valid(s.params);
  auto c = sim_config(s);
  io::Record summary{{"control", s.control}};
  if (s.control == "extremal") {
    const double w0 = s.w0;
    const auto traj = simulate_controlled(p, c, [&](double t) { return extremal_control(p, w0, t); });
    ScalarPath ref;
    double err = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      ref.times.push_back(traj.times[i]);
      ref.values.push_back(extremal_value(p, w0, traj.times[i], Direction::reverse));
      err = std::max(err, std::fabs(traj.states[i].x - ref.values.back()));
    }
    put(s, "trajectory.csv", io::trajectory_table(traj));
    put(s, "extremal.csv", io::scalar_path_table(ref));
    summary.emplace_back("w0", format_number(w0));
    summary.emplace_back("max_error", format_number(err));
  } else {
    const double k = s.gain ? *s.gain : accessibility_gain(p, *s.delta);
    const auto traj = simulate_controlled(p, c, [k](double) { return -k; });
    const auto hit = first_time_below(traj, -0.5);
    put(s, "trajectory.csv", io::trajectory_table(traj));
    summary.emplace_back("gain", format_number(k));
    summary.emplace_back("crossing_time", hit ? format_number(*hit) : "none");
  }
  put(s, "summary.txt", io::record_text(summary));
}

void cmd_lyapunov(const RunSpec& s) {
  const Params p = require_valid(s.params);
  const auto res = find_certificate(p, Rectangle{}, GridResolution{s.grid, s.grid}, s.alpha, p.epsilon0);
  if (!res.ok()) {
    const auto& f = *res.failure;
    throw NumericalError("no Lyapunov certificate: " + f.reason + " at (" + format_number(f.worst_node.x) + ", " +
                         format_number(f.worst_node.y) + "), slack " + format_number(f.worst_slack));
  }
  const auto& c = *res.certificate;
  put(s, "certificate.txt",
      io::record_text({{"alpha", format_number(c.alpha())},
                       {"alpha1", format_number(c.alpha1())},
                       {"alpha2", format_number(c.alpha2())},
                       {"x_min", format_number(c.domain().x_min)},
                       {"x_max", format_number(c.domain().x_max)},
                       {"y_min", format_number(c.domain().y_min)},
                       {"y_max", format_number(c.domain().y_max)},
                       {"nx", std::to_string(c.grid().nx)},
                       {"ny", std::to_string(c.grid().ny)},
                       {"epsilon_max", format_number(c.epsilon_max())},
                       {"min_slack", format_number(c.min_slack)},
                       {"tail_bound", format_number(c.tail_bound)}}));
}

void cmd_action(const RunSpec& s) {
  const Params p = require_valid(s.params);
  const ScalarPath path = s.path_file.empty() ? extremal_path(p, s.w0, s.horizon, s.nodes, Direction::reverse)
                                              : io::parse_scalar_path(io::read_text(s.path_file));
  const auto a = action(p, path);
  io::Record r{{"nodes", std::to_string(path.size())},
               {"horizon", format_number(path.horizon())},
               {"raw", format_number(a.raw)},
               {"normalized", format_number(a.normalized)}};
  if (p.sigma1 == 0.0) {
    try {
      r.emplace_back("closed_form", format_number(closed_form_action(p, path.values.front(), path.values.back())));
    } catch (const ConfigError&) {
      r.emplace_back("closed_form", "none");
    }
  }
  put(s, "path.csv", io::scalar_path_table(path));
  put(s, "action.txt", io::record_text(r));
}

CostOptions cost_options(const RunSpec& s) {
  CostOptions o;
  o.nodes = s.nodes;
  return o;
}

void cmd_costs(const RunSpec& s) {
  const Params p = require_valid(s.params);
  const double delta = s.delta.value_or(default_delta(p));
  const auto opt = cost_options(s);
  if (s.method == "both") {
    const auto a = cost_matrix(p, delta, CostMethod::integral, opt);
    const auto b = cost_matrix(p, delta, CostMethod::path_opt, opt);
    std::vector<double> dis(3, 0.0);
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        if (a(i, j) == b(i, j)) continue;
        dis[static_cast<std::size_t>(i - 1)] = std::max(dis[static_cast<std::size_t>(i - 1)], std::fabs(a(i, j) - b(i, j)));
      }
    }
    put(s, "cost_matrix.csv", io::cost_table(a, dis));
    put(s, "cost_matrix_pathopt.csv", io::cost_table(b));
    put(s, "well_costs.csv", io::well_cost_table(global_costs(a)));
    return;
  }
  const auto m = cost_matrix(p, delta, s.method == "integral" ? CostMethod::integral : CostMethod::path_opt, opt);
  put(s, "cost_matrix.csv", io::cost_table(m));
  put(s, "well_costs.csv", io::well_cost_table(global_costs(m)));
}

void cmd_classify(const RunSpec& s) {
  const Params p = require_valid(s.params);
  const auto c = classify_limit_measure(p, s.delta);
  std::string argmin;
  for (int i : c.stable_argmin) argmin += (argmin.empty() ? "K" : "+K") + std::to_string(i);
  put(s, "cost_matrix.csv", io::cost_table(c.costs));
  put(s, "well_costs.csv", io::well_cost_table(c.wells));
  put(s, "verdict.txt",
      "sigma1=" + format_number(p.sigma1) + ";argmin=" + argmin + ";measure=" + measure_name(c.measure) + "\n");
}

void cmd_invariant(const RunSpec& s) {
  const Params p = require_valid(s.params);
  const double delta = s.delta.value_or(default_delta(p));
  check_delta(p, delta);
  const std::vector<Region> regions{
      Region::band("K1", -1.0, delta), Region::band("K2", 0.0, delta), Region::band("K3", 1.0, delta),
      Region::outside_ball("outside_R", s.radius), Region::whole_plane("plane")};
  EnsembleOptions opt;
  opt.burn_in_fraction = s.burn_in;
  opt.threads = s.threads;
  if (s.init == "stationary") {
    const auto starts = stratified_stationary_initials(p, s.n_paths);
    opt.initial = [starts](std::size_t i) { return starts[i]; };
  }
  const auto res = run_ensemble(p, sim_config(s), s.n_paths, regions, opt);
  put(s, "occupation.csv", io::occupation_table(res.histogram));
}

int fail(const RunSpec& s, int code, const char* kind, const std::string& message) {
  std::cerr << "fwdegen: " << kind << " error: " << message << '\n';
  try {
    io::write_text(s.output / "error.txt", io::record_text({{"kind", kind},
                                                            {"exit_code", std::to_string(code)},
                                                            {"command", command_name(s.command)},
                                                            {"message", one_line(message)}}));
  } catch (const IoError&) {
  }
  return code;
}

}  // namespace

int run(const RunSpec& s) {
  std::error_code ec;
  fs::create_directories(s.output, ec);
  if (ec) {
    std::cerr << "fwdegen: io error: cannot create " << s.output.string() << ": " << ec.message() << '\n';
    return 4;
  }
  try {
    fs::remove(s.output / "error.txt", ec);
    put(s, "manifest.txt", io::record_text(manifest(s)));
    kernels::set_active(kernels::parse_backend(s.kernels));
    switch (s.command) {
      case Command::validate: cmd_validate(s); break;
      case Command::simulate: cmd_simulate(s, true); break;
      case Command::flow: cmd_simulate(s, false); break;
      case Command::control: cmd_control(s); break;
      case Command::lyapunov: cmd_lyapunov(s); break;
      case Command::action: cmd_action(s); break;
      case Command::costs: cmd_costs(s); break;
      case Command::classify: cmd_classify(s); break;
      case Command::invariant: cmd_invariant(s); break;
    }
    return 0;
  } catch (const ConfigError& e) {
    return fail(s, 2, "config", e.what());
  } catch (const NumericalError& e) {
    return fail(s, 3, "numerical", e.what());
  } catch (const IoError& e) {
    return fail(s, 4, "io", e.what());
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Simulation and large-deviation costs for a degenerate double-well diffusion"};
  std::string command;
  std::string config_file;
  std::string manifest_file;
  std::string output;
  std::vector<std::string> sets;
  app.add_option("command", command,
                 "validate | simulate | flow | control | lyapunov | action | costs | classify | invariant");
  app.add_option("--config", config_file, "key = value parameter file");
  app.add_option("--manifest", manifest_file, "rerun from a manifest.txt");
  app.add_option("--set", sets, "key=value override, repeatable")->expected(1)->take_all();
  app.add_option("-o,--output", output, "output directory (default: $FWDEGEN_OUTPUT or fwdegen_out)");

  // flag -> key
  const std::vector<std::pair<std::string, std::string>> flags{
      {"--lambda1", "lambda1"}, {"--lambda2", "lambda2"}, {"--lambda3", "lambda3"}, {"--sigma0", "sigma0"},
      {"--sigma1", "sigma1"},   {"--theta", "theta"},     {"--epsilon", "epsilon"}, {"--epsilon0", "epsilon0"},
      {"--dt", "dt"},           {"--t-final", "t_final"}, {"--seed", "seed"},       {"--n-paths", "n_paths"},
      {"--delta", "delta"},     {"--nodes", "nodes"},     {"--horizon", "horizon"}, {"--burn-in", "burn_in"},
      {"--x0", "x0"},           {"--y0", "y0"},           {"--method", "method"},   {"--w0", "w0"},
      {"--radius", "radius"},   {"--init", "init"},       {"--control", "control"}, {"--gain", "gain"},
      {"--kernels", "kernels"}, {"--grid", "grid"},       {"--threads", "threads"}, {"--alpha", "alpha"},
      {"--path", "path"}};
  std::vector<std::string> values(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) app.add_option(flags[i].first, values[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (output.empty()) {
    const char* env = std::getenv("FWDEGEN_OUTPUT");
    output = env && *env ? env : "fwdegen_out";
  }

  RunSpec failed;
  failed.output = output;
  try {
    config::KeyValues kv;
    if (!manifest_file.empty()) config::merge(kv, config::parse(io::read_text(manifest_file)));
    if (!config_file.empty()) config::merge(kv, config::parse(io::read_text(config_file)));
    for (const auto& a : sets) {
      auto [k, v] = config::parse_assignment(a);
      kv[k] = v;
    }
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (app.get_option(flags[i].first)->count() > 0) kv[flags[i].second] = values[i];
    }
    if (!command.empty()) kv["command"] = command;
    if (auto it = kv.find("command"); it != kv.end()) {
      try {
        failed.command = parse_command(it->second);
      } catch (const ConfigError&) {
      }
    }
    return run(resolve(kv, output));
  } catch (const ConfigError& e) {
    std::error_code ec;
    fs::create_directories(failed.output, ec);
    return fail(failed, 2, "config", e.what());
  } catch (const IoError& e) {
    std::error_code ec;
    fs::create_directories(failed.output, ec);
    return fail(failed, 4, "io", e.what());
  }
}

}  // namespace fwdegen::cli
