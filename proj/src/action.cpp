#include "fwdegen/action.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "fwdegen/errors.hpp"
#include "fwdegen/kernels.hpp"

namespace fwdegen {

ScalarPath ScalarPath::uniform(double T, std::vector<double> values) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("path horizon must be positive and finite");
  if (values.size() < 3) throw ConfigError("path needs at least 3 nodes");
  ScalarPath p;
  const std::size_t n = values.size();
  p.times.resize(n);
  const double h = T / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) p.times[i] = h * static_cast<double>(i);
  p.times.back() = T;
  p.values = std::move(values);
  return p;
}

void check_path(const ScalarPath& path) {
  if (path.times.size() != path.values.size()) throw ConfigError("path times and values differ in length");
  if (path.values.size() < 3) throw ConfigError("path needs at least 3 nodes");
  if (path.times.front() != 0.0) throw ConfigError("path must start at t = 0");
  const double T = path.times.back();
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("path horizon must be positive and finite");
  const double h = T / static_cast<double>(path.size() - 1);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (std::fabs(path.times[i] - h * static_cast<double>(i)) > 1e-9 * T) {
      throw ConfigError("path grid is not uniform at node " + std::to_string(i));
    }
    if (!std::isfinite(path.values[i])) throw ConfigError("nonfinite path value at node " + std::to_string(i));
  }
}

namespace {

double sigma_floor(const Params& p) { return kDegenerateSigmaFraction * p.sigma0; }

void check_sigma(const Params& p, double w, std::size_t node, bool with_node) {
  const double s = diffusion_coeff(p, w);
  if (std::fabs(s) < sigma_floor(p)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "diffusion coefficient vanishes at w = " << w;
    if (with_node) msg << " (node " << node << ")";
    throw DegenerateDiffusionError(msg.str());
  }
}

double action_prefactor(const Params& p) {
  const double a = p.epsilon * std::cos(p.theta);
  return 1.0 / (a * a);
}

}  // namespace

double lagrangian(const Params& p, double w, double wdot) {
  check_sigma(p, w, 0, false);
  return kernels::ref::lagrangian(kernels::coefficients(p), w, wdot);
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

std::vector<double> path_velocity(const ScalarPath& path) {
  const std::size_t n = path.size();
  const double h = path.horizon() / static_cast<double>(n - 1);
  const auto& w = path.values;
  std::vector<double> v(n);
  v[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
  v[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
  return v;
}

ActionValue action(const Params& p, const ScalarPath& path) {
  check_path(path);
  const std::size_t n = path.size();
  for (std::size_t i = 0; i < n; ++i) check_sigma(p, path.values[i], i, true);

  const auto v = path_velocity(path);
  std::vector<double> L(n);
  kernels::active().lagrangian(kernels::coefficients(p), path.values.data(), v.data(), L.data(), n);

  const double h = path.horizon() / static_cast<double>(n - 1);
  L.front() *= 0.5;
  L.back() *= 0.5;
  const double normalized = h * pairwise_sum(L.data(), n);
  return {normalized * action_prefactor(p), normalized};
}

// ---------------------------------------------------------------------------

namespace {

void require_sigma1_zero(const Params& p, const char* what) {
  if (p.sigma1 != 0.0) throw ConfigError(std::string(what) + " requires sigma1 = 0");
}

}  // namespace

double extremal_value(const Params& p, double w0, double t, Direction direction) {
  require_sigma1_zero(p, "extremal path");
  if (!(std::fabs(w0) < 1.0) || w0 == 0.0) throw ConfigError("extremal path needs 0 < |w0| < 1");
  if (!(t >= 0.0)) throw ConfigError("extremal path time must be nonnegative");
  // w0 e^{-+l t} / sqrt(1 - w0^2 + w0^2 e^{-+2 l t}), written so forward time cannot overflow
  if (direction == Direction::reverse) {
    const double e = std::exp(-p.lambda1 * t);
    return w0 * e / std::sqrt((1.0 - w0 * w0) + w0 * w0 * (e * e));
  }
  const double e = std::exp(-p.lambda1 * t);
  return w0 / std::sqrt((1.0 - w0 * w0) * (e * e) + w0 * w0);
}

ScalarPath extremal_path(const Params& p, double w0, double T, std::size_t n, Direction direction) {
  if (n < 3) throw ConfigError("extremal path needs at least 3 nodes");
  std::vector<double> values(n);
  auto path = ScalarPath::uniform(T, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) values[i] = extremal_value(p, w0, path.times[i], direction);
  path.values = std::move(values);
  return path;
}

double extremal_control(const Params& p, double w0, double t) {
  require_sigma1_zero(p, "extremal control");
  const double e = std::exp(-p.lambda1 * t);
  const double d = (1.0 - w0 * w0) + w0 * w0 * (e * e);
  const double num = -2.0 * p.lambda1 * w0 * (1.0 - w0 * w0) * e;
  return num / (p.epsilon * p.sigma0 * std::cos(p.theta) * d * std::sqrt(d));
}

double closed_form_action(const Params& p, double w0, double wT) {
  require_sigma1_zero(p, "closed-form action");
  // The reverse flow w' = -l1 w (1 - w^2) runs toward 0 inside [-1,1] and
  // away from +-1 outside it.
  const bool inner_right = 0.0 <= wT && wT <= w0 && w0 <= 1.0;
  const bool inner_left = -1.0 <= w0 && w0 <= wT && wT <= 0.0;
  const bool outer_right = 1.0 <= w0 && w0 <= wT;
  const bool outer_left = wT <= w0 && w0 <= -1.0;
  if (!(inner_right || inner_left || outer_right || outer_left)) {
    throw ConfigError("endpoints are not joined by one monotone reverse-flow segment");
  }
  const double a = wT * wT - 1.0;
  const double b = w0 * w0 - 1.0;
  return p.lambda1 / (2.0 * p.sigma0 * p.sigma0) * (a * a - b * b);
}

}  // namespace fwdegen
