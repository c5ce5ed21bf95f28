#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fwdegen/kernels.hpp"
#include "fwdegen/model.hpp"

namespace fwdegen {

/// Uniform time grid t_k = k dt, k = 0..N, with N = ceil(t_final / dt).
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;

  std::size_t size() const { return times.size(); }
};

struct SimConfig {
  double dt = 1e-3;
  double t_final = 10.0;
  std::uint64_t seed = 1;
  State initial{};
};

/// Throws ConfigError unless dt > 0, dt <= t_final and lambda1 dt < 0.1.
void check_config(const Params& p, const SimConfig& c);

/// Number of steps N = ceil(t_final / dt), ignoring round-off below 1e-9 steps.
std::size_t step_count(const SimConfig& c);

// ---------------------------------------------------------------------------
// Brownian increments
// ---------------------------------------------------------------------------

/// Gaussian increments sqrt(dt) Z for one path. The substream depends only on
/// (seed, path_index), so ensembles are reproducible in any execution order.
class IncrementStream {
 public:
  IncrementStream(std::uint64_t seed, std::uint64_t path_index, double dt);

  double next() { return scale_ * normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  double scale_;
};

// ---------------------------------------------------------------------------
// Single paths
// ---------------------------------------------------------------------------

struct SdeIncrement {
  Vec2 drift;
  Vec2 noise;  // both components driven by the same dw
};

SdeIncrement sde_increment(const Params& p, State s, double dt, double dw);

/// One Euler-Maruyama step.
State step_sde(const Params& p, State s, double dt, double dw);

/// Euler-Maruyama path driven by substream 0 of c.seed.
Trajectory simulate_sde(const Params& p, const SimConfig& c);

/// Noise-free flow, classical fourth-order Runge-Kutta with fixed step.
Trajectory simulate_flow(const Params& p, const SimConfig& c);

using Control = std::function<double(double)>;

/// Control system: the flow plus eps (sigma0 + sigma1 x) phi(t) (cos, sin).
Trajectory simulate_controlled(const Params& p, const SimConfig& c, const Control& phi);

/// Gain k such that the constant control phi = -k pushes x down faster than
/// unit speed on [-1/2, 1 + delta]. `margin` > 1 multiplies the bound.
double accessibility_gain(const Params& p, double delta, double margin = 1.01);

/// First time the x-component is <= level; nullopt if it never is.
std::optional<double> first_time_below(const Trajectory& t, double level);

// ---------------------------------------------------------------------------
// Occupation measures
// ---------------------------------------------------------------------------

class Region {
 public:
  static Region band(std::string name, double center_x, double half_width);
  static Region outside_ball(std::string name, double radius);
  static Region whole_plane(std::string name);
  static Region custom(std::string name, std::function<bool(State)> predicate);

  const std::string& name() const { return name_; }
  bool contains(State s) const;

  /// Kernel form of the predicate; nullopt for custom regions.
  std::optional<kernels::RegionTest> kernel_test() const { return test_; }

 private:
  Region(std::string name, std::optional<kernels::RegionTest> test, std::function<bool(State)> pred)
      : name_(std::move(name)), test_(test), predicate_(std::move(pred)) {}

  std::string name_;
  std::optional<kernels::RegionTest> test_;
  std::function<bool(State)> predicate_;
};

/// Time spent in each region by the grid states t_k, k > burn-in steps.
/// Stored as integer step counts so merging is exact and order-free.
struct OccupationHistogram {
  std::vector<std::string> regions;
  std::vector<std::uint64_t> counts;
  std::uint64_t counted_steps = 0;
  double dt = 0.0;
  double burn_in = 0.0;  // model time excluded at the start of each path

  double time(std::size_t region) const { return static_cast<double>(counts[region]) * dt; }
  double total_time() const { return static_cast<double>(counted_steps) * dt; }
  double fraction(std::size_t region) const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  void merge(const OccupationHistogram& other);
};

inline constexpr double kDefaultBurnInFraction = 0.1;

struct EnsembleOptions {
  double burn_in_fraction = kDefaultBurnInFraction;
  unsigned threads = 0;  // 0: hardware concurrency
  /// Initial state of each path; base.initial when empty.
  std::function<State(std::size_t)> initial;
};

struct EnsembleResult {
  OccupationHistogram histogram;
  std::vector<State> final_states;  // indexed by path
};

EnsembleResult run_ensemble(const Params& p, const SimConfig& base, std::size_t n_paths,
                            const std::vector<Region>& regions, const EnsembleOptions& options = {});

// ---------------------------------------------------------------------------
// Stationary law of the x-component
// ---------------------------------------------------------------------------

/// The x-equation is autonomous, so the x-marginal of the invariant law is
/// the stationary density of a scalar diffusion:
///   p(x) ~ exp(int_0^x 2 F(u) / s(u)^2 du) / s(x)^2,
///   F(u) = l1 u (1 - u^2),  s(u) = eps |cos theta| (sigma0 + sigma1 u).
/// Tabulated on a uniform grid and normalized by trapezoidal quadrature.
class StationaryMarginal {
 public:
  StationaryMarginal(const Params& p, std::size_t nodes = 40001, double half_width = 4.0);

  double probability(double a, double b) const;
  double quantile(double u) const;

  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& density() const { return density_; }

 private:
  double cdf_at(double x) const;

  std::vector<double> x_;
  std::vector<double> density_;
  std::vector<double> cdf_;
};

/// n initial states at the stratified quantiles (i + 1/2) / n of the
/// stationary x-marginal, with y = 0.
std::vector<State> stratified_stationary_initials(const Params& p, std::size_t n);

}  // namespace fwdegen
