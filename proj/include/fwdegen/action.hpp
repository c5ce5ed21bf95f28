#pragma once
// Action functional of the x-component on scalar paths,
//   S_0T(w) = 1/(eps cos theta)^2 * int_0^T L(w, w') dt,
//   L(w, w') = 0.5 ((w' - l1 w (1 - w^2)) / (sigma0 + sigma1 w))^2,
// and the closed-form reverse-flow extremals for sigma1 = 0.

#include <cstddef>
#include <vector>

#include "fwdegen/model.hpp"

namespace fwdegen {

/// w sampled on a uniform grid of [0, T].
struct ScalarPath {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double horizon() const { return times.back(); }

  /// Uniform grid t_i = i T / (n - 1) carrying the given values.
  static ScalarPath uniform(double T, std::vector<double> values);
};

/// Throws ConfigError unless lengths match, n >= 3, times[0] = 0, T > 0 and
/// the grid is uniform to 1e-9 relative.
void check_path(const ScalarPath& path);

struct ActionValue {
  double raw;         // includes 1 / (eps cos theta)^2
  double normalized;  // eps-free
};

/// Below this fraction of sigma0 the diffusion coefficient counts as zero.
inline constexpr double kDegenerateSigmaFraction = 1e-9;

/// Throws DegenerateDiffusionError when |sigma0 + sigma1 w| is below threshold.
double lagrangian(const Params& p, double w, double wdot);

/// Trapezoid rule on L with centred differences inside and second-order
/// one-sided differences at both ends.
ActionValue action(const Params& p, const ScalarPath& path);

/// Finite-difference velocity used by action().
std::vector<double> path_velocity(const ScalarPath& path);

enum class Direction { forward, reverse };

/// Closed-form solution of w' = +-l1 w (1 - w^2) from w0, sigma1 = 0 only.
/// reverse decays to the saddle, forward grows toward sign(w0).
ScalarPath extremal_path(const Params& p, double w0, double T, std::size_t n, Direction direction);

double extremal_value(const Params& p, double w0, double t, Direction direction);

/// Control that drives the control system along the reverse flow from w0.
double extremal_control(const Params& p, double w0, double t);

/// l1 / (2 sigma0^2) ((wT^2 - 1)^2 - (w0^2 - 1)^2), normalized. Throws
/// ConfigError unless one monotone reverse-flow segment joins w0 to wT.
double closed_form_action(const Params& p, double w0, double wT);

/// Sum in a fixed pairwise order, independent of thread count.
double pairwise_sum(const double* v, std::size_t n);

}  // namespace fwdegen
