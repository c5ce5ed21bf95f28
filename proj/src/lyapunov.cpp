#include "fwdegen/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fwdegen/errors.hpp"
#include "fwdegen/kernels.hpp"

namespace fwdegen {

double lyapunov_W(double alpha, State s) {
  const double x2 = s.x * s.x;
  return 1.0 + x2 * x2 + alpha * (s.y * s.y);
}

double generator_on_W(const Params& p, double alpha, State s) {
  return kernels::ref::generator_on_w(kernels::coefficients(p), alpha, s.x, s.y);
}

double max_lyapunov_weight(const Params& p) {
  return 8.0 * p.lambda1 * p.lambda2 / (p.lambda3 * p.lambda3);
}

double default_lyapunov_weight(const Params& p) { return 0.5 * max_lyapunov_weight(p); }

LyapunovCertificate LyapunovCertificate::make(const Params& p, double alpha, double alpha1, double alpha2,
                                              Rectangle domain, GridResolution grid, double epsilon_max) {
  if (!(alpha > 0.0 && alpha < max_lyapunov_weight(p))) {
    throw ConfigError("Lyapunov weight alpha must lie in ]0, 8 lambda1 lambda2 / lambda3^2[");
  }
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || !std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw ConfigError("alpha1 and alpha2 must be positive and finite");
  }
  LyapunovCertificate c;
  c.alpha_ = alpha;
  c.alpha1_ = alpha1;
  c.alpha2_ = alpha2;
  c.domain_ = domain;
  c.grid_ = grid;
  c.epsilon_max_ = epsilon_max;
  return c;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + h * static_cast<double>(i);
  v[n - 1] = hi;
  return v;
}

struct GridMax {
  double value;
  State node;
};

// max over the grid of L W + alpha2 W
GridMax grid_max(const Params& p, double alpha, double alpha2, Rectangle d, GridResolution g, double eps) {
  Params q = p;
  q.epsilon = eps;
  const auto coeff = kernels::coefficients(q);
  const auto& table = kernels::active();
  const auto xs = linspace(d.x_min, d.x_max, g.nx);
  const auto ys = linspace(d.y_min, d.y_max, g.ny);
  std::vector<double> x4(g.nx);
  for (std::size_t i = 0; i < g.nx; ++i) x4[i] = (xs[i] * xs[i]) * (xs[i] * xs[i]);
  std::vector<double> row(g.nx);

  GridMax best{-std::numeric_limits<double>::infinity(), {xs[0], ys[0]}};
  for (double y : ys) {
    table.generator_on_w_row(coeff, alpha, y, xs.data(), row.data(), g.nx);
    const double ay2 = alpha * (y * y);
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = row[i] + alpha2 * ((1.0 + x4[i]) + ay2);
      if (!(v <= best.value)) best = {v, {xs[i], y}};
    }
  }
  return best;
}

// Polynomial majorant of L W + alpha2 W:
//   P(x^2) - q y^2,   P(t) = -mu t^3 + a t^2 + b t + c.
struct TailPolynomial {
  double mu, a, b, c, q;

  double at(double t) const { return ((-mu * t + a) * t + b) * t + c; }

  double sup_from(double t0) const {
    const double t_star = (2.0 * a + std::sqrt(4.0 * a * a + 12.0 * mu * b)) / (6.0 * mu);
    return at(std::max(t0, t_star));
  }
};

TailPolynomial tail_polynomial(const Params& p, double alpha, double alpha2, double eps) {
  const double l1 = p.lambda1, l2 = p.lambda2, l3 = p.lambda3;
  // Smallest eigenvalue of [[4 l1, alpha l3], [alpha l3, 2 alpha l2]] bounds the
  // dominant form 4 l1 x^6 + 2 alpha l3 x^3 y + 2 alpha l2 y^2 from below.
  const double tr = 4.0 * l1 + 2.0 * alpha * l2;
  const double gap = std::hypot(4.0 * l1 - 2.0 * alpha * l2, 2.0 * alpha * l3);
  const double mu = 0.5 * (tr - gap);
  // 2 alpha l3 |x y| <= alpha l3 (eta x^2 + y^2 / eta), eta chosen so the y^2 share is mu / 4.
  const double eta = 4.0 * alpha * l3 / mu;
  const double e2 = eps * eps;
  const double c2 = std::cos(p.theta) * std::cos(p.theta);
  const double s2 = std::sin(p.theta) * std::sin(p.theta);
  const double s0 = p.sigma0 * p.sigma0;
  const double s1 = p.sigma1 * p.sigma1;
  // (sigma0 + sigma1 x)^2 <= 2 sigma0^2 + 2 sigma1^2 x^2.
  TailPolynomial t{};
  t.mu = mu;
  t.a = 4.0 * l1 + 12.0 * e2 * s1 * c2 + alpha2;
  t.b = alpha * l3 * eta + 12.0 * e2 * s0 * c2 + 2.0 * e2 * s1 * alpha * s2;
  t.c = 2.0 * e2 * s0 * alpha * s2 + alpha2;
  t.q = mu - alpha * l3 / eta - alpha2 * alpha;
  return t;
}

}  // namespace

GridScan scan_slack(const Params& p, double alpha, double alpha1, double alpha2, Rectangle domain,
                    GridResolution grid, double epsilon) {
  const GridMax m = grid_max(p, alpha, alpha2, domain, grid, epsilon);
  return {alpha1 - m.value, m.node};
}

GridScan verify_certificate(const Params& p, const LyapunovCertificate& cert, double epsilon) {
  return scan_slack(p, cert.alpha(), cert.alpha1(), cert.alpha2(), cert.domain(), cert.grid(), epsilon);
}

CertificateResult find_certificate(const Params& p, Rectangle domain, GridResolution grid,
                                   std::optional<double> alpha_opt, std::optional<double> epsilon_opt) {
  if (domain.x_min > -3.0 || domain.x_max < 3.0 || domain.y_min > -3.0 || domain.y_max < 3.0) {
    throw ConfigError("certificate domain must contain [-3,3]^2");
  }
  if (grid.nx < 2 || grid.ny < 2) throw ConfigError("certificate grid needs at least 2x2 nodes");
  const double alpha = alpha_opt.value_or(default_lyapunov_weight(p));
  if (!(alpha > 0.0 && alpha < max_lyapunov_weight(p))) {
    throw ConfigError("Lyapunov weight alpha must lie in ]0, 8 lambda1 lambda2 / lambda3^2[");
  }
  const double eps = epsilon_opt.value_or(p.epsilon0);

  const double x_reach = std::min(-domain.x_min, domain.x_max);
  const double y_reach = std::min(-domain.y_min, domain.y_max);

  CertificateFailure last{"no candidate alpha2 produced a positive slack", {0.0, 0.0}, 0.0};
  const TailPolynomial probe = tail_polynomial(p, alpha, 0.0, eps);
  double alpha2 = probe.mu / (4.0 * alpha);
  for (int attempt = 0; attempt < 30; ++attempt, alpha2 *= 0.5) {
    const TailPolynomial tail = tail_polynomial(p, alpha, alpha2, eps);
    if (!(tail.mu > 0.0) || !(tail.q > 0.0)) continue;
    const double outside_x = tail.sup_from(x_reach * x_reach);
    const double outside_y = tail.sup_from(0.0) - tail.q * y_reach * y_reach;
    const double tail_bound = std::max(outside_x, outside_y);

    const GridMax m = grid_max(p, alpha, alpha2, domain, grid, eps);
    const double top = std::max(m.value, tail_bound);
    const double alpha1 = top + 1e-6 * std::max(1.0, std::fabs(top));
    if (!std::isfinite(alpha1) || !(alpha1 > 0.0)) {
      last = {"alpha1 not positive and finite", m.node, alpha1 - m.value};
      continue;
    }
    const double slack = alpha1 - m.value;
    if (!(slack > 0.0)) {
      last = {"grid slack not positive", m.node, slack};
      continue;
    }
    auto cert = LyapunovCertificate::make(p, alpha, alpha1, alpha2, domain, grid, eps);
    cert.min_slack = slack;
    cert.tail_bound = tail_bound;
    return {cert, std::nullopt};
  }
  return {std::nullopt, last};
}

}  // namespace fwdegen
