#include "fwdegen/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fwdegen {

namespace {

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::array<Equilibrium, 3> equilibria() {
  return {{
      {{-1.0, 0.0}, EquilibriumKind::stable, 1},
      {{0.0, 0.0}, EquilibriumKind::saddle, 2},
      {{1.0, 0.0}, EquilibriumKind::stable, 3},
  }};
}

std::vector<double> forbidden_angles(const Params& p) {
  const double denom = 2.0 * p.lambda1 - p.lambda2;
  if (denom == 0.0) return {};
  const double a = std::atan(2.0 * p.lambda3 / denom);
  if (a == 0.0) return {a};
  // tan has period pi: the antipodal angle is also in ]-pi, pi[.
  return {a, a > 0.0 ? a - std::numbers::pi : a + std::numbers::pi};
}

ValidationResult validate_params(const Params& p, double angle_tolerance) {
  ValidationResult result;
  auto& v = result.violations;

  const double fields[] = {p.lambda1, p.lambda2, p.lambda3, p.sigma0,
                           p.sigma1,  p.theta,   p.epsilon, p.epsilon0};
  for (double f : fields) {
    if (!std::isfinite(f)) {
      v.push_back({Clause::nonfinite, "all parameters must be finite"});
      return result;
    }
  }

  const std::pair<const char*, double> rates[] = {
      {"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"lambda3", p.lambda3}};
  for (const auto& [name, value] : rates) {
    if (!(value > 0.0)) {
      v.push_back({Clause::nonpositive_rate,
                   std::string(name) + " must be positive, got " + fmt_value(value)});
    }
  }

  if (!(p.sigma0 > 0.0)) {
    v.push_back({Clause::nonpositive_sigma0, "sigma0 must be positive, got " + fmt_value(p.sigma0)});
  } else if (!(std::fabs(p.sigma1) < p.sigma0)) {
    v.push_back({Clause::sigma1_range, "sigma1 not in ]-sigma0, sigma0[: sigma1 = " +
                                           fmt_value(p.sigma1) + ", sigma0 = " + fmt_value(p.sigma0)});
  }

  constexpr double pi = std::numbers::pi;
  if (!(p.theta > -pi && p.theta < pi)) {
    v.push_back({Clause::theta_range, "theta not in ]-pi, pi[: " + fmt_value(p.theta)});
  } else {
    if (std::fabs(std::fabs(p.theta) - pi / 2.0) <= angle_tolerance) {
      v.push_back({Clause::theta_forbidden, "theta forbidden: theta = +-pi/2"});
    }
    if (p.lambda1 > 0.0 && p.lambda2 > 0.0 && p.lambda3 > 0.0) {
      for (double a : forbidden_angles(p)) {
        if (std::fabs(p.theta - a) <= angle_tolerance) {
          v.push_back({Clause::theta_forbidden,
                       "theta forbidden: tan(theta) = 2 lambda3 / (2 lambda1 - lambda2) at theta = " +
                           fmt_value(a)});
        }
      }
    }
  }

  if (!(p.epsilon0 > 0.0)) {
    v.push_back({Clause::epsilon_range, "epsilon0 must be positive, got " + fmt_value(p.epsilon0)});
  } else if (!(p.epsilon > 0.0 && p.epsilon < p.epsilon0)) {
    v.push_back({Clause::epsilon_range, "epsilon not in ]0, epsilon0[: epsilon = " +
                                            fmt_value(p.epsilon) + ", epsilon0 = " + fmt_value(p.epsilon0)});
  }

  if (v.empty()) result.params = p;
  return result;
}

Vec2 drift(const Params& p, State s) {
  const double cubic = s.x * (1.0 - s.x * s.x);
  return {p.lambda1 * cubic, p.lambda3 * cubic - p.lambda2 * s.y};
}

double diffusion_coeff(const Params& p, double x) { return p.sigma0 + p.sigma1 * x; }

Vec2 noise_field(const Params& p, State s) {
  const double amp = p.epsilon * diffusion_coeff(p, s.x);
  return {amp * std::cos(p.theta), amp * std::sin(p.theta)};
}

std::array<double, 4> drift_jacobian(const Params& p, State s) {
  const double d = 1.0 - 3.0 * s.x * s.x;
  return {p.lambda1 * d, 0.0, p.lambda3 * d, -p.lambda2};
}

Vec2 lie_bracket(const Params& p, State s) {
  const Vec2 f0 = drift(p, s);
  const Vec2 f1 = noise_field(p, s);
  const auto j0 = drift_jacobian(p, s);
  // F1 depends on x only: DF1 = eps sigma1 (cos, sin)^T (1, 0).
  const double c = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  const double k = p.epsilon * p.sigma1;
  const Vec2 df1_f0{k * c * f0.x, k * sn * f0.x};
  const Vec2 df0_f1{j0[0] * f1.x + j0[1] * f1.y, j0[2] * f1.x + j0[3] * f1.y};
  return {df1_f0.x - df0_f1.x, df1_f0.y - df0_f1.y};
}

double bracket_determinant(const Params& p) {
  // Unit-noise copy: the eps (sigma0 - sigma1) factor common to both
  // columns is divided out, so the result is independent of eps.
  Params unit = p;
  unit.epsilon = 1.0;
  const State z1{-1.0, 0.0};
  const double scale = diffusion_coeff(unit, z1.x);
  const Vec2 b = lie_bracket(unit, z1);
  const Vec2 f = noise_field(unit, z1);
  const double b0 = b.x / scale, b1 = b.y / scale;
  const double f0 = f.x / scale, f1 = f.y / scale;
  return b0 * f1 - f0 * b1;
}

double generator_apply(const Params& p, const ScalarField& f, State s) {
  const FieldJet j = f(s);
  const Vec2 b = drift(p, s);
  const double sig = diffusion_coeff(p, s.x);
  const double q = p.epsilon * p.epsilon * sig * sig;
  const double c = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  return b.x * j.dx + b.y * j.dy + 0.5 * q * (c * c * j.dxx + sn * sn * j.dyy) +
         q * sn * c * j.dxy;
}

}  // namespace fwdegen
