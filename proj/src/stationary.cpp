#include <algorithm>
#include <cmath>
#include <limits>

#include "fwdegen/errors.hpp"
#include "fwdegen/simulate.hpp"

namespace fwdegen {

StationaryMarginal::StationaryMarginal(const Params& p, std::size_t nodes, double half_width) {
  const double noise = p.epsilon * std::fabs(std::cos(p.theta));
  if (!(noise > 0.0)) throw ConfigError("stationary marginal needs eps |cos theta| > 0");
  if (nodes < 3 || !(half_width > 1.0)) throw ConfigError("stationary grid too small");

  // Keep the grid strictly inside the half-line where sigma0 + sigma1 x > 0.
  double lo = -half_width;
  double hi = half_width;
  if (p.sigma1 != 0.0) {
    const double zero = -p.sigma0 / p.sigma1;
    const double pad = 1e-6 * half_width;
    if (p.sigma1 > 0.0) lo = std::max(lo, zero + pad);
    else hi = std::min(hi, zero - pad);
  }
  if (!(lo < 0.0 && hi > 0.0)) throw ConfigError("stationary grid does not contain the origin");

  const double h = (hi - lo) / static_cast<double>(nodes - 1);
  x_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) x_[i] = lo + h * static_cast<double>(i);

  auto s2 = [&](double u) {
    const double s = noise * (p.sigma0 + p.sigma1 * u);
    return s * s;
  };
  auto integrand = [&](double u) { return 2.0 * p.lambda1 * u * (1.0 - u * u) / s2(u); };

  // Potential anchored at the node closest to x = 0, trapezoid outward.
  std::vector<double> log_p(nodes);
  const auto anchor = static_cast<std::size_t>(std::llround(-lo / h));
  double acc = 0.0;
  log_p[anchor] = 0.0;
  for (std::size_t i = anchor + 1; i < nodes; ++i) {
    acc += 0.5 * h * (integrand(x_[i - 1]) + integrand(x_[i]));
    log_p[i] = acc;
  }
  acc = 0.0;
  for (std::size_t i = anchor; i-- > 0;) {
    acc -= 0.5 * h * (integrand(x_[i]) + integrand(x_[i + 1]));
    log_p[i] = acc;
  }
  for (std::size_t i = 0; i < nodes; ++i) log_p[i] -= std::log(s2(x_[i]));

  const double peak = *std::max_element(log_p.begin(), log_p.end());
  density_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) density_[i] = std::exp(log_p[i] - peak);

  cdf_.assign(nodes, 0.0);
  for (std::size_t i = 1; i < nodes; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * h * (density_[i - 1] + density_[i]);
  const double total = cdf_.back();
  for (std::size_t i = 0; i < nodes; ++i) {
    density_[i] /= total;
    cdf_[i] /= total;
  }
}

double StationaryMarginal::cdf_at(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const double h = x_[1] - x_[0];
  const auto i = std::min(static_cast<std::size_t>((x - x_.front()) / h), x_.size() - 2);
  // Exact integral of the piecewise-linear density over [x_i, x].
  const double d = x - x_[i];
  const double slope = (density_[i + 1] - density_[i]) / h;
  return cdf_[i] + d * (density_[i] + 0.5 * slope * d);
}

double StationaryMarginal::probability(double a, double b) const {
  if (b < a) std::swap(a, b);
  return cdf_at(b) - cdf_at(a);
}

double StationaryMarginal::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("quantile level must be in ]0, 1[");
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf_.begin()));
  const double c0 = cdf_[i - 1];
  const double c1 = cdf_[i];
  const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return x_[i - 1] + w * (x_[i] - x_[i - 1]);
}

std::vector<State> stratified_stationary_initials(const Params& p, std::size_t n) {
  const StationaryMarginal marginal(p);
  std::vector<State> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {marginal.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n)), 0.0};
  }
  return out;
}

}  // namespace fwdegen
