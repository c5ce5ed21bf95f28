#pragma once
// Passage costs between the bands K_i = {|x - x_i| <= delta} around
// x_1 = -1, x_2 = 0, x_3 = 1, global costs over rooted graphs, and the
// small-noise limit of the invariant law.

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fwdegen/action.hpp"
#include "fwdegen/model.hpp"

namespace fwdegen {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// a + b, saturating at kInfiniteCost.
double add_costs(double a, double b);

struct Well {
  int index;  // 1, 2, 3
  double center_x;
  double delta;

  static Well make(const Params& p, int index, double delta);
};

/// min(0.1, (sigma0 - |sigma1|) / (2 |sigma1|)), or 0.1 when sigma1 = 0.
double default_delta(const Params& p);

/// Throws ConfigError unless 0 < delta < 1/2 and, for sigma1 != 0,
/// delta < (sigma0 - |sigma1|) / |sigma1|.
void check_delta(const Params& p, double delta);

// ---------------------------------------------------------------------------
// Single passages
// ---------------------------------------------------------------------------

/// 2 * int |l1 u (1 - u^2)| / (sigma0 + sigma1 u)^2 du over the part of the
/// segment from_x -> to_x that runs against the flow. Adaptive Simpson,
/// absolute tolerance 1e-10.
double passage_cost_integral(const Params& p, double from_x, double to_x);

inline constexpr double kPathOptGradientTolerance = 1e-8;
inline constexpr std::size_t kPathOptMaxIterations = 10000;

struct PathOptResult {
  double cost;         // normalized
  double grad_norm;    // Euclidean norm over interior nodes
  std::size_t iterations;
  ScalarPath path;
};

/// Minimizes the discrete normalized action with pinned endpoints over paths
/// of n nodes on [0, T]. Throws NumericalError if the gradient norm is still
/// above tolerance after the iteration cap.
PathOptResult passage_cost_pathopt(const Params& p, double from_x, double to_x, double T, std::size_t n);

/// Segment-midpoint discrete action minimized by passage_cost_pathopt.
double discrete_action(const Params& p, const std::vector<double>& w, double dt);

struct HorizonSearch {
  double t_min = 0.25;
  double t_max = 80.0;
  std::size_t grid = 14;     // geometric samples before refinement
  double log_tolerance = 1e-3;
};

/// Infimum over the horizon as well: geometric scan of T, then golden-section
/// refinement of the best bracket in log T. result.path.horizon() is the
/// minimizing T.
PathOptResult passage_cost_pathopt_free(const Params& p, double from_x, double to_x, std::size_t n,
                                        const HorizonSearch& search = {});

// ---------------------------------------------------------------------------
// Matrices and graphs
// ---------------------------------------------------------------------------

enum class CostMethod { integral, path_opt };

std::string method_name(CostMethod m);

struct CostMatrix {
  std::array<std::array<double, 3>, 3> v{};  // v[i-1][j-1] = V_ij
  CostMethod method = CostMethod::integral;
  double delta = 0.0;

  double operator()(int i, int j) const { return v[i - 1][j - 1]; }
  double& operator()(int i, int j) { return v[i - 1][j - 1]; }
};

struct CostOptions {
  std::size_t nodes = 400;  // path optimizer only
  HorizonSearch horizon{};
};

/// Direct costs between band edges for neighbouring wells, V_13 = V_31 = inf
/// before the min-plus closure, which routes them through the saddle band.
/// Downhill entries V_21, V_23 and the diagonal are zero.
CostMatrix cost_matrix(const Params& p, double delta, CostMethod method, const CostOptions& options = {});

struct WellCosts {
  std::array<double, 3> w{};
  std::vector<int> argmin;  // 1-based, ascending

  double operator()(int i) const { return w[i - 1]; }
};

/// Minimum over the three rooted in-trees of each well.
WellCosts global_costs(const CostMatrix& cm);

enum class LimitMeasure { right, left, half_half };

/// "delta_(1,0)", "delta_(-1,0)", "0.5*delta_(1,0)+0.5*delta_(-1,0)".
std::string measure_name(LimitMeasure m);

/// Measure predicted by the sign of sigma1 alone.
LimitMeasure sign_rule(const Params& p);

struct Classification {
  LimitMeasure measure;
  std::vector<int> stable_argmin;  // subset of {1, 3}
  CostMatrix costs;
  WellCosts wells;
};

/// Support of the limit law from the argmin of the global costs over the
/// stable wells. Throws NumericalError when it disagrees with sign_rule.
Classification classify_limit_measure(const Params& p, std::optional<double> delta = std::nullopt,
                                      CostMethod method = CostMethod::integral,
                                      const CostOptions& options = {});

}  // namespace fwdegen
