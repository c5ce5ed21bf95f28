#pragma once
// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; SIMD variants must reproduce it bit for bit, so they use
// the same operation order and no fused multiply-add.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "fwdegen/model.hpp"

namespace fwdegen::kernels {

/// Model constants flattened for the kernels; trig values precomputed.
struct Coefficients {
  double lambda1;
  double lambda2;
  double lambda3;
  double sigma0;
  double sigma1;
  double epsilon;
  double cos_theta;
  double sin_theta;
};

Coefficients coefficients(const Params& p);

/// Occupation predicate understood by the stepping kernel.
struct RegionTest {
  enum class Kind : std::uint8_t { band, outside_ball, whole_plane };
  Kind kind;
  double a;  // band: center in x;   outside_ball: radius^2
  double b;  // band: half-width
};

inline constexpr std::size_t kMaxKernelRegions = 8;

struct StepBlock {
  std::size_t lanes;          // independent paths, stored structure-of-arrays
  std::size_t steps;
  double dt;
  double* x;                  // [lanes]
  double* y;                  // [lanes]
  const double* dw;           // [steps][lanes] Brownian increments
  const RegionTest* regions;  // [n_regions]
  std::size_t n_regions;      // <= kMaxKernelRegions
  std::uint64_t* counts;      // [n_regions][lanes]; untouched when !count
  bool count;
};

struct KernelTable {
  const char* name;

  /// Advances every lane `steps` Euler-Maruyama steps; after each step adds
  /// one to counts[r][lane] when the new state lies in region r.
  void (*euler_maruyama_block)(const Coefficients& c, const StepBlock& block);

  /// out[i] = generator applied to W(x,y) = 1 + x^4 + alpha y^2 at (x[i], y).
  void (*generator_on_w_row)(const Coefficients& c, double alpha, double y,
                             const double* x, double* out, std::size_t n);

  /// out[i] = 0.5 ((wdot[i] - l1 w(1-w^2)) / (s0 + s1 w))^2.
  void (*lagrangian)(const Coefficients& c, const double* w, const double* wdot,
                     double* out, std::size_t n);
};

enum class Backend { automatic, scalar, avx2 };

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Table for a backend; throws ConfigError if it is unavailable.
const KernelTable& table_for(Backend backend);

/// Process-wide selection. The initial value comes from FWDEGEN_KERNELS
/// (auto | scalar | avx2), defaulting to auto (best available).
const KernelTable& active();
void set_active(Backend backend);
Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend backend);

// Scalar reference formulas, shared by the scalar table and SIMD tails.
namespace ref {

inline void euler_maruyama_step(const Coefficients& c, double dt, double dw, double& x, double& y) {
  const double cubic = x * (1.0 - x * x);
  const double sig = c.sigma0 + c.sigma1 * x;
  const double noise = (c.epsilon * sig) * dw;
  const double xn = x + (c.lambda1 * cubic) * dt + c.cos_theta * noise;
  const double yn = y + (c.lambda3 * cubic - c.lambda2 * y) * dt + c.sin_theta * noise;
  x = xn;
  y = yn;
}

inline bool in_region(const RegionTest& r, double x, double y) {
  switch (r.kind) {
    case RegionTest::Kind::band: {
      const double d = x - r.a;
      return (d < 0.0 ? -d : d) <= r.b;
    }
    case RegionTest::Kind::outside_ball:
      return x * x + y * y > r.a;
    case RegionTest::Kind::whole_plane:
      return true;
  }
  return false;
}

inline double generator_on_w(const Coefficients& c, double alpha, double x, double y) {
  const double x2 = x * x;
  const double one_minus = 1.0 - x2;
  const double cubic = x * one_minus;
  const double x4 = x2 * x2;
  const double sig = c.sigma0 + c.sigma1 * x;
  const double e2 = c.epsilon * c.epsilon;
  const double quartic_term = ((4.0 * c.lambda1) * x4) * one_minus;
  const double y_term = ((2.0 * alpha) * y) * (c.lambda2 * y - c.lambda3 * cubic);
  const double curvature = (6.0 * (c.cos_theta * c.cos_theta)) * x2 + alpha * (c.sin_theta * c.sin_theta);
  const double noise_term = (e2 * (sig * sig)) * curvature;
  return (quartic_term - y_term) + noise_term;
}

inline double lagrangian(const Coefficients& c, double w, double wdot) {
  const double g = (wdot - c.lambda1 * (w * (1.0 - w * w))) / (c.sigma0 + c.sigma1 * w);
  return 0.5 * (g * g);
}

}  // namespace ref

}  // namespace fwdegen::kernels
