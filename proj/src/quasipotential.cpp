#include "fwdegen/quasipotential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwdegen/errors.hpp"

namespace fwdegen {

double add_costs(double a, double b) {
  if (a == kInfiniteCost || b == kInfiniteCost) return kInfiniteCost;
  return a + b;
}

double default_delta(const Params& p) {
  if (p.sigma1 == 0.0) return 0.1;
  const double s1 = std::fabs(p.sigma1);
  return std::min(0.1, (p.sigma0 - s1) / (2.0 * s1));
}

void check_delta(const Params& p, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("band half-width delta must lie in ]0, 1/2[");
  if (p.sigma1 != 0.0) {
    const double s1 = std::fabs(p.sigma1);
    if (!(delta < (p.sigma0 - s1) / s1)) {
      throw ConfigError("band half-width delta must be below (sigma0 - |sigma1|) / |sigma1|");
    }
  }
}

Well Well::make(const Params& p, int index, double delta) {
  if (index < 1 || index > 3) throw ConfigError("well index must be 1, 2 or 3");
  check_delta(p, delta);
  return {index, static_cast<double>(index - 2), delta};
}

// ---------------------------------------------------------------------------
// Line integral
// ---------------------------------------------------------------------------

namespace {

// Written so that integrating an even integrand over [-b,-a] repeats the
// exact floating-point operations used on [a,b].
template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * ((fa + fm) + 4.0 * flm);
  const double right = (b - m) / 6.0 * ((fm + fb) + 4.0 * frm);
  const double both = left + right;
  if (depth <= 0 || std::fabs(both - whole) <= 15.0 * tol) return both + (both - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * ((fa + fb) + 4.0 * fm);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

void check_segment_sigma(const Params& p, double a, double b) {
  const double floor = kDegenerateSigmaFraction * p.sigma0;
  // linear in x, so the endpoints decide
  if (!(diffusion_coeff(p, a) > floor) || !(diffusion_coeff(p, b) > floor)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "diffusion coefficient not positive on [" << a << ", " << b << "]";
    throw DegenerateDiffusionError(msg.str());
  }
}

double flow(const Params& p, double u) { return p.lambda1 * (u * (1.0 - u * u)); }

}  // namespace

double passage_cost_integral(const Params& p, double from_x, double to_x) {
  if (!std::isfinite(from_x) || !std::isfinite(to_x)) throw ConfigError("passage endpoints must be finite");
  const double lo = std::min(from_x, to_x);
  const double hi = std::max(from_x, to_x);
  check_segment_sigma(p, lo, hi);
  if (lo == hi) return 0.0;
  const double dir = to_x > from_x ? 1.0 : -1.0;

  auto integrand = [&](double u) {
    const double s = p.sigma0 + p.sigma1 * u;
    return std::fabs(flow(p, u)) / (s * s);
  };

  // pieces between consecutive zeros of the flow keep one sign
  std::vector<double> cuts{lo};
  for (double z : {-1.0, 0.0, 1.0}) {
    if (z > lo && z < hi) cuts.push_back(z);
  }
  cuts.push_back(hi);

  const double tol = 0.5e-10 / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (dir * flow(p, 0.5 * (a + b)) >= 0.0) continue;  // carried by the flow
    total += adaptive_simpson(integrand, a, b, tol);
  }
  return 2.0 * total;
}

// ---------------------------------------------------------------------------
// Path optimizer
// ---------------------------------------------------------------------------

namespace {

// r = sqrt(dt/2) (v - F(m)) / sigma(m) on one segment [a, b] with
// m = (a+b)/2, v = (b-a)/dt, and its first and second derivatives in (a, b).
struct Segment {
  double r, ra, rb, raa, rab, rbb;
};

Segment segment(const Params& p, double a, double b, double dt, bool second) {
  const double c = std::sqrt(0.5 * dt);
  const double m = 0.5 * (a + b);
  const double v = (b - a) / dt;
  const double s = p.sigma0 + p.sigma1 * m;
  if (!(s > kDegenerateSigmaFraction * p.sigma0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "path optimizer left the nondegenerate band at w = " << m;
    throw DegenerateDiffusionError(msg.str());
  }
  const double F = flow(p, m);
  const double F1 = p.lambda1 * (1.0 - 3.0 * m * m);
  const double g = (v - F) / s;
  const double k = p.sigma1 / s;
  const double gm = -F1 / s - g * k;
  const double gv = 1.0 / s;
  Segment out{};
  out.r = c * g;
  out.ra = c * (0.5 * gm - gv / dt);
  out.rb = c * (0.5 * gm + gv / dt);
  if (second) {
    const double F2 = -6.0 * p.lambda1 * m;
    const double gmm = -F2 / s + F1 * k / s - gm * k + g * k * k;
    const double gmv = -k / s;
    out.raa = c * (0.25 * gmm - gmv / dt);
    out.rab = c * (0.25 * gmm);
    out.rbb = c * (0.25 * gmm + gmv / dt);
  }
  return out;
}

struct Model {
  double value;
  std::vector<double> grad;  // all nodes
  std::vector<double> diag;  // Hessian diagonal
  std::vector<double> off;   // Hessian (i, i+1)
};

Model evaluate(const Params& p, const std::vector<double>& w, double dt) {
  const std::size_t n = w.size();
  Model m{0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)};
  std::vector<double> sq(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Segment s = segment(p, w[i], w[i + 1], dt, true);
    sq[i] = s.r * s.r;
    m.grad[i] += 2.0 * s.r * s.ra;
    m.grad[i + 1] += 2.0 * s.r * s.rb;
    m.diag[i] += 2.0 * (s.ra * s.ra + s.r * s.raa);
    m.diag[i + 1] += 2.0 * (s.rb * s.rb + s.r * s.rbb);
    m.off[i] += 2.0 * (s.ra * s.rb + s.r * s.rab);
  }
  m.value = pairwise_sum(sq.data(), sq.size());
  return m;
}

// Solves (H + mu I) d = -g on the interior nodes; false if not positive definite.
bool newton_direction(const Model& m, double mu, std::vector<double>& d) {
  const std::size_t n = m.grad.size();
  const std::size_t k = n - 2;
  std::vector<double> piv(k), rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    double dd = m.diag[i + 1] + mu;
    double r = -m.grad[i + 1];
    if (i > 0) {
      const double l = m.off[i] / piv[i - 1];
      dd -= l * m.off[i];
      r -= l * rhs[i - 1];
    }
    if (!(dd > 0.0)) return false;
    piv[i] = dd;
    rhs[i] = r;
  }
  d.assign(n, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double r = rhs[i];
    if (i + 1 < k) r -= m.off[i + 1] * d[i + 2];
    d[i + 1] = r / piv[i];
  }
  return true;
}

double interior_norm(const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) s += g[i] * g[i];
  return std::sqrt(s);
}

}  // namespace

double discrete_action(const Params& p, const std::vector<double>& w, double dt) {
  std::vector<double> sq(w.size() - 1);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double r = segment(p, w[i], w[i + 1], dt, false).r;
    sq[i] = r * r;
  }
  return pairwise_sum(sq.data(), sq.size());
}

PathOptResult passage_cost_pathopt(const Params& p, double from_x, double to_x, double T, std::size_t n) {
  if (n < 3) throw ConfigError("path optimizer needs at least 3 nodes");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("path optimizer horizon must be positive");
  check_segment_sigma(p, std::min(from_x, to_x), std::max(from_x, to_x));
  const double dt = T / static_cast<double>(n - 1);

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    w[i] = from_x + s * (to_x - from_x);
  }
  w.back() = to_x;

  Model m = evaluate(p, w, dt);
  double gn = interior_norm(m.grad);
  double mu = 1e-6;
  std::size_t it = 0;
  std::vector<double> d, trial(n);
  for (; it < kPathOptMaxIterations && gn > kPathOptGradientTolerance; ++it) {
    bool moved = false;
    while (!moved && mu < 1e12) {
      if (!newton_direction(m, mu, d)) {
        mu = std::max(10.0 * mu, 1e-8);
        continue;
      }
      double slope = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i) slope += m.grad[i] * d[i];
      double step = 1.0;
      for (int k = 0; k < 40 && !moved; ++k, step *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] + step * d[i];
        double value;
        try {
          value = discrete_action(p, trial, dt);
        } catch (const DegenerateDiffusionError&) {
          continue;
        }
        // rounding slack lets Newton finish once the decrease is below eps
        if (value <= m.value + 1e-4 * step * slope + 4e-16 * m.value) {
          Model next = evaluate(p, trial, dt);
          const double ngn = interior_norm(next.grad);
          if (value < m.value || ngn < gn) {
            w.swap(trial);
            m = std::move(next);
            gn = ngn;
            moved = true;
          }
        }
      }
      if (moved) mu = std::max(mu / 3.0, 1e-12);
      else mu *= 10.0;
    }
    if (!moved) break;
  }
  if (!(gn <= kPathOptGradientTolerance)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "path optimizer did not converge: gradient norm " << gn << " after " << it << " iterations ("
        << from_x << " -> " << to_x << ", T = " << T << ", n = " << n << ")";
    throw NumericalError(msg.str());
  }
  return {m.value, gn, it, ScalarPath::uniform(T, w)};
}

PathOptResult passage_cost_pathopt_free(const Params& p, double from_x, double to_x, std::size_t n,
                                        const HorizonSearch& s) {
  if (!(s.t_min > 0.0 && s.t_max > s.t_min) || s.grid < 3) throw ConfigError("bad horizon search range");
  const double l0 = std::log(s.t_min);
  const double l1 = std::log(s.t_max);
  auto solve = [&](double logT) { return passage_cost_pathopt(p, from_x, to_x, std::exp(logT), n); };

  std::vector<double> logs(s.grid);
  std::vector<double> costs(s.grid);
  std::optional<PathOptResult> best;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < s.grid; ++k) {
    logs[k] = l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(s.grid - 1);
    auto r = solve(logs[k]);
    costs[k] = r.cost;
    if (!best || r.cost < best->cost) {
      best = std::move(r);
      best_k = k;
    }
  }

  double a = logs[best_k == 0 ? 0 : best_k - 1];
  double b = logs[std::min(best_k + 1, s.grid - 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  auto rc = solve(c);
  auto rd = solve(d);
  while (b - a > s.log_tolerance) {
    if (rc.cost < rd.cost) {
      b = d;
      d = c;
      rd = std::move(rc);
      c = b - g * (b - a);
      rc = solve(c);
    } else {
      a = c;
      c = d;
      rc = std::move(rd);
      d = a + g * (b - a);
      rd = solve(d);
    }
  }
  for (auto* r : {&rc, &rd}) {
    if (r->cost < best->cost) best = std::move(*r);
  }
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// Matrices and graphs
// ---------------------------------------------------------------------------

std::string method_name(CostMethod m) { return m == CostMethod::integral ? "integral" : "pathopt"; }

CostMatrix cost_matrix(const Params& p, double delta, CostMethod method, const CostOptions& options) {
  check_delta(p, delta);
  CostMatrix cm;
  cm.method = method;
  cm.delta = delta;

  // from the edge of K_i facing K_j to the edge of K_j facing K_i
  auto direct = [&](int i, int j) {
    const double xi = static_cast<double>(i - 2);
    const double xj = static_cast<double>(j - 2);
    const double from = xj > xi ? xi + delta : xi - delta;
    const double to = xj > xi ? xj - delta : xj + delta;
    if (method == CostMethod::integral) return passage_cost_integral(p, from, to);
    return passage_cost_pathopt_free(p, from, to, options.nodes, options.horizon).cost;
  };

  for (auto& row : cm.v) row.fill(0.0);
  cm(1, 2) = direct(1, 2);
  cm(3, 2) = direct(3, 2);
  if (method == CostMethod::integral) {
    cm(2, 1) = direct(2, 1);
    cm(2, 3) = direct(2, 3);
  }
  // path_opt: leaving the saddle band downhill is free at the exact flow
  // time; the optimizer would only return that zero up to its tolerance.
  cm(1, 3) = kInfiniteCost;
  cm(3, 1) = kInfiniteCost;

  for (int k = 1; k <= 3; ++k) {
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        cm(i, j) = std::min(cm(i, j), add_costs(cm(i, k), cm(k, j)));
      }
    }
  }
  return cm;
}

WellCosts global_costs(const CostMatrix& cm) {
  WellCosts out;
  for (int i = 1; i <= 3; ++i) {
    const int j = i == 1 ? 2 : 1;
    const int k = i == 3 ? 2 : 3;
    const double g1 = add_costs(cm(j, i), cm(k, i));
    const double g2 = add_costs(cm(j, i), cm(k, j));
    const double g3 = add_costs(cm(j, k), cm(k, i));
    out.w[i - 1] = std::min({g1, g2, g3});
  }
  const double lo = *std::min_element(out.w.begin(), out.w.end());
  for (int i = 1; i <= 3; ++i) {
    if (out(i) == lo) out.argmin.push_back(i);
  }
  return out;
}

std::string measure_name(LimitMeasure m) {
  switch (m) {
    case LimitMeasure::right:
      return "delta_(1,0)";
    case LimitMeasure::left:
      return "delta_(-1,0)";
    case LimitMeasure::half_half:
      return "0.5*delta_(1,0)+0.5*delta_(-1,0)";
  }
  return "?";
}

LimitMeasure sign_rule(const Params& p) {
  if (p.sigma1 > 0.0) return LimitMeasure::left;
  if (p.sigma1 < 0.0) return LimitMeasure::right;
  return LimitMeasure::half_half;
}

Classification classify_limit_measure(const Params& p, std::optional<double> delta, CostMethod method,
                                      const CostOptions& options) {
  const double d = delta.value_or(default_delta(p));
  Classification c{LimitMeasure::half_half, {}, cost_matrix(p, d, method, options), {}};
  c.wells = global_costs(c.costs);
  const double lo = std::min(c.wells(1), c.wells(3));
  for (int i : {1, 3}) {
    if (c.wells(i) == lo) c.stable_argmin.push_back(i);
  }
  if (c.stable_argmin.size() == 2) c.measure = LimitMeasure::half_half;
  else c.measure = c.stable_argmin.front() == 1 ? LimitMeasure::left : LimitMeasure::right;

  const LimitMeasure expected = sign_rule(p);
  if (c.measure != expected) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "global-cost argmin gives " << measure_name(c.measure) << " but sigma1 = " << p.sigma1 << " gives "
        << measure_name(expected) << " (W1 = " << c.wells(1) << ", W3 = " << c.wells(3) << ")";
    throw NumericalError(msg.str());
  }
  return c;
}

}  // namespace fwdegen
