#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "fwdegen/errors.hpp"
#include "fwdegen/kernels.hpp"
#include "support.hpp"

using namespace fwdegen;
namespace k = fwdegen::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

struct BlockRun {
  std::vector<double> x, y;
  std::vector<std::uint64_t> counts;
};

BlockRun run_block(const k::KernelTable& t, const k::Coefficients& c, std::size_t lanes, std::size_t steps,
                   bool count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  BlockRun r;
  r.x.resize(lanes);
  r.y.resize(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    r.x[l] = u(rng);
    r.y[l] = u(rng);
  }
  std::vector<double> dw(lanes * steps);
  for (auto& v : dw) v = 0.03 * n01(rng);
  const std::vector<k::RegionTest> regions{{k::RegionTest::Kind::band, -1.0, 0.1},
                                           {k::RegionTest::Kind::band, 0.0, 0.25},
                                           {k::RegionTest::Kind::band, 1.0, 0.1},
                                           {k::RegionTest::Kind::outside_ball, 1.44, 0.0},
                                           {k::RegionTest::Kind::whole_plane, 0.0, 0.0}};
  r.counts.assign(regions.size() * lanes, 7);  // counts accumulate onto existing values
  k::StepBlock b{lanes, steps, 1e-3, r.x.data(), r.y.data(), dw.data(), regions.data(), regions.size(),
                 r.counts.data(), count};
  t.euler_maruyama_block(c, b);
  return r;
}

}  // namespace

TEST_CASE("backend names") {
  CHECK(k::parse_backend("auto") == k::Backend::automatic);
  CHECK(k::parse_backend("scalar") == k::Backend::scalar);
  CHECK(k::parse_backend("avx2") == k::Backend::avx2);
  CHECK_THROWS_AS(k::parse_backend("neon"), ConfigError);
  CHECK(k::backend_name(k::Backend::scalar) == "scalar");
  CHECK(std::string(k::scalar_table().name) == "scalar");
}

TEST_CASE("set_active switches the process-wide table") {
  const k::KernelTable* before = &k::active();
  k::set_active(k::Backend::scalar);
  CHECK(&k::active() == &k::scalar_table());
  k::set_active(k::Backend::automatic);
  CHECK(&k::active() == (k::avx2_table() ? k::avx2_table() : &k::scalar_table()));
  if (before == &k::scalar_table()) k::set_active(k::Backend::scalar);
}

TEST_CASE("scalar Euler-Maruyama block equals repeated reference steps") {
  testing::Sampler s(21);
  const auto c = k::coefficients(s.params());
  const std::size_t lanes = 5, steps = 40;
  const auto r = run_block(k::scalar_table(), c, lanes, steps, true, 99);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  std::vector<double> x(lanes), y(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    x[l] = u(rng);
    y[l] = u(rng);
  }
  std::vector<double> dw(lanes * steps);
  for (auto& v : dw) v = 0.03 * n01(rng);
  std::vector<std::uint64_t> in_k2(lanes, 7);
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t l = 0; l < lanes; ++l) {
      k::ref::euler_maruyama_step(c, 1e-3, dw[step * lanes + l], x[l], y[l]);
      in_k2[l] += std::fabs(x[l]) <= 0.25;
    }
  }
  for (std::size_t l = 0; l < lanes; ++l) {
    CHECK(same_bits(r.x[l], x[l]));
    CHECK(same_bits(r.y[l], y[l]));
    CHECK(r.counts[1 * lanes + l] == in_k2[l]);
    CHECK(r.counts[4 * lanes + l] == 7 + steps);
  }
}

TEST_CASE("AVX2 kernels reproduce the scalar kernels bit for bit") {
  const k::KernelTable* avx = k::avx2_table();
  if (!avx) {
    MESSAGE("AVX2 unavailable; equivalence not exercised");
    return;
  }
  testing::Sampler s(23);
  for (int trial = 0; trial < 12; ++trial) {
    const auto c = k::coefficients(s.params());
    // lane counts cover full registers, tails and a single lane
    for (std::size_t lanes : {1u, 3u, 4u, 7u, 16u, 19u}) {
      for (bool count : {true, false}) {
        const auto a = run_block(k::scalar_table(), c, lanes, 64, count, 1000 + trial);
        const auto b = run_block(*avx, c, lanes, 64, count, 1000 + trial);
        bool xs = true, cs = a.counts == b.counts;
        for (std::size_t l = 0; l < lanes; ++l) xs = xs && same_bits(a.x[l], b.x[l]) && same_bits(a.y[l], b.y[l]);
        CHECK(xs);
        CHECK(cs);
      }
    }

    const double alpha = s.uniform(0.1, 3.0);
    for (std::size_t n : {1u, 4u, 13u, 601u}) {
      std::vector<double> x(n), o1(n), o2(n);
      for (auto& v : x) v = s.uniform(-3, 3);
      const double y = s.uniform(-3, 3);
      k::scalar_table().generator_on_w_row(c, alpha, y, x.data(), o1.data(), n);
      avx->generator_on_w_row(c, alpha, y, x.data(), o2.data(), n);
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) ok = ok && same_bits(o1[i], o2[i]) && same_bits(o1[i], k::ref::generator_on_w(c, alpha, x[i], y));
      CHECK(ok);

      std::vector<double> w(n), wd(n), l1(n), l2(n);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = s.uniform(-1, 1);
        wd[i] = s.uniform(-2, 2);
      }
      k::scalar_table().lagrangian(c, w.data(), wd.data(), l1.data(), n);
      avx->lagrangian(c, w.data(), wd.data(), l2.data(), n);
      ok = true;
      for (std::size_t i = 0; i < n; ++i) ok = ok && same_bits(l1[i], l2[i]) && same_bits(l1[i], k::ref::lagrangian(c, w[i], wd[i]));
      CHECK(ok);
    }
  }
}

TEST_CASE("region predicates") {
  const k::RegionTest band{k::RegionTest::Kind::band, 1.0, 0.1};
  CHECK(k::ref::in_region(band, 1.09, 5.0));
  CHECK(k::ref::in_region(band, 0.95, -5.0));
  CHECK_FALSE(k::ref::in_region(band, 1.2, 0.0));
  const k::RegionTest ball{k::RegionTest::Kind::outside_ball, 9.0, 0.0};
  CHECK(k::ref::in_region(ball, 3.0, 0.1));
  CHECK_FALSE(k::ref::in_region(ball, 3.0, 0.0));
  CHECK(k::ref::in_region({k::RegionTest::Kind::whole_plane, 0, 0}, 1e300, -1e300));
}
