#pragma once
// Degenerate two-dimensional double-well diffusion
//
//   dX = l1 X (1 - X^2) dt                 + eps cos(theta) (s0 + s1 X) dB
//   dY = (-l2 Y + l3 X (1 - X^2)) dt       + eps sin(theta) (s0 + s1 X) dB
//
// driven by a single scalar Brownian motion B.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fwdegen {

struct Params {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
  double sigma0 = 1.0;
  double sigma1 = 0.0;
  double theta = 0.7853981633974483;
  double epsilon = 0.1;
  double epsilon0 = 0.5;
};

struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class EquilibriumKind { stable, saddle };

struct Equilibrium {
  State point;
  EquilibriumKind kind;
  int index;  // 1, 2, 3 from left to right
};

/// z1 = (-1,0), z2 = (0,0), z3 = (1,0).
std::array<Equilibrium, 3> equilibria();

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Clause {
  nonfinite,
  nonpositive_rate,
  nonpositive_sigma0,
  sigma1_range,
  theta_range,
  theta_forbidden,
  epsilon_range,
};

struct Violation {
  Clause clause;
  std::string message;
};

struct ValidationResult {
  std::optional<Params> params;     // set iff no violations
  std::vector<Violation> violations;

  bool ok() const { return params.has_value(); }
};

inline constexpr double kDefaultAngleTolerance = 1e-12;

/// Checks every clause of the model hypotheses and reports all failures.
ValidationResult validate_params(const Params& p, double angle_tolerance = kDefaultAngleTolerance);

/// Angles in ]-pi, pi[ at which the bracket matrix at z1 is singular,
/// besides +-pi/2. Empty when 2*lambda1 == lambda2.
std::vector<double> forbidden_angles(const Params& p);

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

Vec2 drift(const Params& p, State s);

/// sigma0 + sigma1 * x
double diffusion_coeff(const Params& p, double x);

/// Noise direction field F1 = eps (sigma0 + sigma1 x) (cos theta, sin theta).
Vec2 noise_field(const Params& p, State s);

/// Jacobian of the drift, row-major {d b1/dx, d b1/dy, d b2/dx, d b2/dy}.
std::array<double, 4> drift_jacobian(const Params& p, State s);

/// Lie bracket [F0, F1] = DF1 F0 - DF0 F1.
Vec2 lie_bracket(const Params& p, State s);

/// Determinant of the matrix whose columns are [F0,F1](z1) and F1(z1), both
/// divided by eps (sigma0 - sigma1). Nonzero iff the weak Hormander
/// condition holds at z1 through the first bracket.
double bracket_determinant(const Params& p);

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

/// Value, gradient and Hessian of a C^2 scalar field at one point.
struct FieldJet {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
};

using ScalarField = std::function<FieldJet(State)>;

/// Infinitesimal generator of the diffusion applied to f at s.
double generator_apply(const Params& p, const ScalarField& f, State s);

}  // namespace fwdegen
