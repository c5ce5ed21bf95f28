#include <cmath>

#include "fwdegen/kernels.hpp"

namespace fwdegen::kernels {

namespace {

void euler_maruyama_block_scalar(const Coefficients& c, const StepBlock& b) {
  for (std::size_t lane = 0; lane < b.lanes; ++lane) {
    double x = b.x[lane];
    double y = b.y[lane];
    std::uint64_t local[kMaxKernelRegions] = {};
    for (std::size_t k = 0; k < b.steps; ++k) {
      ref::euler_maruyama_step(c, b.dt, b.dw[k * b.lanes + lane], x, y);
      if (b.count) {
        for (std::size_t r = 0; r < b.n_regions; ++r) local[r] += ref::in_region(b.regions[r], x, y);
      }
    }
    b.x[lane] = x;
    b.y[lane] = y;
    if (b.count) {
      for (std::size_t r = 0; r < b.n_regions; ++r) b.counts[r * b.lanes + lane] += local[r];
    }
  }
}

void generator_on_w_row_scalar(const Coefficients& c, double alpha, double y, const double* x,
                               double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = ref::generator_on_w(c, alpha, x[i], y);
}

void lagrangian_scalar(const Coefficients& c, const double* w, const double* wdot, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = ref::lagrangian(c, w[i], wdot[i]);
}

}  // namespace

Coefficients coefficients(const Params& p) {
  return {p.lambda1, p.lambda2, p.lambda3, p.sigma0, p.sigma1,
          p.epsilon, std::cos(p.theta), std::sin(p.theta)};
}

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", &euler_maruyama_block_scalar, &generator_on_w_row_scalar,
                                 &lagrangian_scalar};
  return table;
}

}  // namespace fwdegen::kernels
