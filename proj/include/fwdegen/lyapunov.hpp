#pragma once
// Drift condition L W <= alpha1 - alpha2 W for W(x,y) = 1 + x^4 + alpha y^2,
// checked on a grid and extended outside it by an explicit polynomial bound.

#include <cstddef>
#include <optional>
#include <string>

#include "fwdegen/model.hpp"

namespace fwdegen {

struct Rectangle {
  double x_min = -3.0;
  double x_max = 3.0;
  double y_min = -3.0;
  double y_max = 3.0;
};

struct GridResolution {
  std::size_t nx = 601;
  std::size_t ny = 601;
};

double lyapunov_W(double alpha, State s);

/// Closed form of the generator applied to W.
double generator_on_W(const Params& p, double alpha, State s);

/// Upper end of the admissible weights: 8 lambda1 lambda2 / lambda3^2.
double max_lyapunov_weight(const Params& p);

/// Midpoint of the admissible interval, 4 lambda1 lambda2 / lambda3^2.
double default_lyapunov_weight(const Params& p);

class LyapunovCertificate {
 public:
  /// Throws ConfigError unless 0 < alpha < 8 l1 l2 / l3^2 and alpha1, alpha2 > 0.
  static LyapunovCertificate make(const Params& p, double alpha, double alpha1, double alpha2,
                                  Rectangle domain, GridResolution grid, double epsilon_max);

  double alpha() const { return alpha_; }
  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  const Rectangle& domain() const { return domain_; }
  const GridResolution& grid() const { return grid_; }
  double epsilon_max() const { return epsilon_max_; }

  /// Smallest alpha1 - alpha2 W - L W over the grid at the certified epsilon.
  double min_slack = 0.0;
  /// Largest value of L W + alpha2 W allowed outside the grid by the tail bound.
  double tail_bound = 0.0;

 private:
  LyapunovCertificate() = default;
  double alpha_ = 0.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
  Rectangle domain_{};
  GridResolution grid_{};
  double epsilon_max_ = 0.0;
};

struct CertificateFailure {
  std::string reason;
  State worst_node;
  double worst_slack;
};

struct CertificateResult {
  std::optional<LyapunovCertificate> certificate;
  std::optional<CertificateFailure> failure;

  bool ok() const { return certificate.has_value(); }
};

struct GridScan {
  double min_slack;
  State worst_node;
};

/// Minimum of alpha1 - alpha2 W - L W over the grid nodes, noise level eps.
GridScan scan_slack(const Params& p, double alpha, double alpha1, double alpha2, Rectangle domain,
                    GridResolution grid, double epsilon);

/// Re-verifies a certificate at another noise level on its own grid.
GridScan verify_certificate(const Params& p, const LyapunovCertificate& cert, double epsilon);

/// Searches (alpha1, alpha2) for the weight alpha (default: the midpoint)
/// at noise level `epsilon` (default: p.epsilon0). The domain must contain
/// [-3,3]^2. Throws ConfigError for an inadmissible alpha.
CertificateResult find_certificate(const Params& p, Rectangle domain = {}, GridResolution grid = {},
                                   std::optional<double> alpha = std::nullopt,
                                   std::optional<double> epsilon = std::nullopt);

}  // namespace fwdegen
