#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fwdegen/action.hpp"
#include "fwdegen/errors.hpp"
#include "fwdegen/lyapunov.hpp"
#include "fwdegen/simulate.hpp"
#include "support.hpp"

using namespace fwdegen;

namespace {

double logistic(double x0, double l, double t) {
  const double e = std::exp(l * t);
  return x0 * e / std::sqrt(1.0 - x0 * x0 + x0 * x0 * e * e);
}

}  // namespace

TEST_CASE("step_sde examples") {
  Params p;
  p.epsilon = 0.0;
  for (double dw : {-1.0, 0.0, 2.5}) {
    const State s = step_sde(p, {-1.0, 0.0}, 1e-2, dw);
    CHECK(s.x == -1.0);
    CHECK(s.y == 0.0);
  }
  Params q;
  q.sigma1 = 0.3;
  const State s0{0.4, -0.2};
  const double dt = 1e-2;
  const State s = step_sde(q, s0, dt, 0.0);
  const Vec2 b = drift(q, s0);
  CHECK(s.x == doctest::Approx(s0.x + dt * b.x).epsilon(1e-15));
  CHECK(s.y == doctest::Approx(s0.y + dt * b.y).epsilon(1e-15));

  q.theta = 0.0;
  for (double dw : {-0.3, 0.1, 0.7}) {
    const State a = step_sde(q, s0, dt, dw);
    const State c = step_sde(q, s0, dt, 0.0);
    CHECK(a.y == c.y);
  }
}

TEST_CASE("both components share one Brownian increment") {
  testing::Sampler rng(31);
  for (int i = 0; i < 200; ++i) {
    const Params p = rng.params();
    const State s{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto inc = sde_increment(p, s, 1e-3, rng.uniform(-0.1, 0.1));
    const double lhs = inc.noise.y * std::cos(p.theta);
    const double rhs = inc.noise.x * std::sin(p.theta);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14).scale(1e-300));
  }
}

TEST_CASE("simulate_sde: length, noiseless convergence, determinism") {
  Params p;
  p.epsilon = 0.0;
  SimConfig c;
  c.dt = 1e-3;
  c.t_final = 20.0;
  c.initial = {0.5, 0.0};
  const auto t = simulate_sde(p, c);
  CHECK(t.size() == 20001);
  CHECK(t.times.front() == 0.0);
  CHECK(std::fabs(t.states.back().x - 1.0) < 1e-3);

  c.initial = {-0.5, 0.7};
  const auto u = simulate_sde(p, c);
  CHECK(std::fabs(u.states.back().x + 1.0) < 1e-3);
  CHECK(std::fabs(u.states.back().y) < 1e-3);

  Params q;
  q.epsilon = 0.3;
  q.sigma1 = 0.2;
  SimConfig d;
  d.t_final = 3.0;
  d.seed = 42;
  const auto a = simulate_sde(q, d);
  const auto b = simulate_sde(q, d);
  CHECK(a.states == b.states);
  d.seed = 43;
  CHECK_FALSE(simulate_sde(q, d).states == a.states);

  SimConfig odd;
  odd.dt = 0.03;
  odd.t_final = 1.0;
  CHECK(simulate_sde(q, odd).size() == 35);  // ceil(1/0.03) + 1
}

TEST_CASE("simulate_sde rejects bad configurations and aborts on blow-up") {
  Params p;
  SimConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(simulate_sde(p, c), ConfigError);
  c.dt = 0.2;  // lambda1 dt >= 0.1
  CHECK_THROWS_AS(simulate_sde(p, c), ConfigError);
  c.dt = 1e-3;
  c.t_final = 1e-4;
  CHECK_THROWS_AS(simulate_sde(p, c), ConfigError);

  SimConfig blow;
  blow.dt = 1e-2;
  blow.t_final = 1.0;
  blow.initial = {1e60, 0.0};
  try {
    simulate_sde(p, blow);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("simulate_flow examples") {
  Params p;
  SimConfig c;
  c.dt = 1e-3;
  c.t_final = 5.0;
  const auto rest = simulate_flow(p, c);
  for (const auto& s : rest.states) CHECK((s.x == 0.0 && s.y == 0.0));

  p.lambda2 = 1.7;
  c.initial = {0.0, 2.0};
  const auto axis = simulate_flow(p, c);
  for (std::size_t i = 0; i < axis.size(); i += 500) {
    CHECK(axis.states[i].x == 0.0);
    CHECK(axis.states[i].y == doctest::Approx(2.0 * std::exp(-1.7 * axis.times[i])).epsilon(1e-12));
  }

  Params q;
  SimConfig d;
  d.dt = 1e-3;
  d.t_final = 1.0;
  d.initial = {0.5, 0.0};
  const auto f = simulate_flow(q, d);
  const double closed = logistic(0.5, 1.0, 1.0);
  const double oracle = testing::integrate_scalar([](double x) { return x * (1 - x * x); }, 0.5, 1.0, 200000);
  CHECK(closed == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(closed == doctest::Approx(0.843347).epsilon(1e-6));
  CHECK(std::fabs(f.states.back().x - closed) < 1e-12);
}

TEST_CASE("noiseless Euler-Maruyama is first order against the RK4 flow") {
  Params p;
  p.epsilon = 0.0;
  auto gap = [&](double dt) {
    SimConfig c;
    c.dt = dt;
    c.t_final = 2.0;
    c.initial = {0.3, 0.4};
    const auto a = simulate_sde(p, c);
    const auto b = simulate_flow(p, c);
    return std::fabs(a.states.back().x - b.states.back().x) + std::fabs(a.states.back().y - b.states.back().y);
  };
  const double e1 = gap(1e-2);
  const double e2 = gap(1e-3);
  CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("simulate_controlled") {
  Params p;
  p.sigma1 = 0.2;
  SimConfig c;
  c.t_final = 4.0;
  c.initial = {0.2, -0.3};
  const auto a = simulate_controlled(p, c, [](double) { return 0.0; });
  const auto b = simulate_flow(p, c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.states[i].x == doctest::Approx(b.states[i].x).epsilon(1e-14).scale(1e-14));
    CHECK(a.states[i].y == doctest::Approx(b.states[i].y).epsilon(1e-14).scale(1e-14));
  }
}

TEST_CASE("constant control from the accessibility bound crosses -1/2") {
  testing::Sampler rng(37);
  for (int i = 0; i < 10; ++i) {
    Params p = rng.params();
    if (std::cos(p.theta) < 0.2) continue;
    const double delta = 0.1;
    if (!(p.sigma0 - std::fabs(p.sigma1) * (1 + delta) > 0.05 * p.sigma0)) continue;
    const double k = accessibility_gain(p, delta);
    SimConfig c;
    c.dt = std::min(1e-3, 0.05 / (p.lambda1 + k * p.epsilon * p.sigma0));
    c.t_final = (1.1 + 0.5) / 1.0 + 1.0;
    c.initial = {1.0 + delta, 0.0};
    const auto t = simulate_controlled(p, c, [k](double) { return -k; });
    const auto hit = first_time_below(t, -0.5);
    REQUIRE(hit.has_value());
    CHECK(*hit <= 1.6);
  }
}

TEST_CASE("extremal control drives the reverse flow") {
  Params p;
  p.theta = 0.5;
  p.epsilon = 0.2;
  p.sigma0 = 1.3;
  const double w0 = 0.6;
  SimConfig c;
  c.t_final = 5.0;
  c.initial = {w0, 0.0};
  const auto t = simulate_controlled(p, c, [&](double s) { return extremal_control(p, w0, s); });
  double err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    err = std::max(err, std::fabs(t.states[i].x - extremal_value(p, w0, t.times[i], Direction::reverse)));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("run_ensemble: single path equals single-path occupation") {
  Params p;
  p.epsilon = 0.4;
  p.sigma1 = -0.3;
  SimConfig c;
  c.t_final = 30.0;
  c.seed = 9;
  c.initial = {0.9, 0.1};
  const std::vector<Region> regions{Region::band("K3", 1.0, 0.1), Region::band("K2", 0.0, 0.1),
                                    Region::outside_ball("far", 1.2), Region::whole_plane("all")};
  const auto res = run_ensemble(p, c, 1, regions);
  const auto traj = simulate_sde(p, c);
  const std::size_t n = traj.size() - 1;
  const auto burn = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
  std::vector<std::uint64_t> expect(regions.size(), 0);
  for (std::size_t i = burn + 1; i <= n; ++i) {
    for (std::size_t r = 0; r < regions.size(); ++r) expect[r] += regions[r].contains(traj.states[i]);
  }
  CHECK(res.histogram.counts == expect);
  CHECK(res.histogram.counted_steps == n - burn);
  CHECK(res.histogram.fraction(3) == 1.0);
  CHECK(res.final_states[0] == traj.states.back());
  CHECK(res.histogram.burn_in == doctest::Approx(3.0));
}

TEST_CASE("run_ensemble is independent of threads and of region representation") {
  Params p;
  p.epsilon = 0.45;
  p.sigma1 = 0.25;
  SimConfig c;
  c.t_final = 10.0;
  c.seed = 5;
  std::vector<Region> regions{Region::band("K1", -1.0, 0.2), Region::band("K3", 1.0, 0.2)};
  EnsembleOptions one;
  one.threads = 1;
  EnsembleOptions many;
  many.threads = 3;
  many.initial = one.initial = [](std::size_t i) { return State{i % 2 ? 0.8 : -0.8, 0.0}; };
  const auto a = run_ensemble(p, c, 37, regions, one);
  const auto b = run_ensemble(p, c, 37, regions, many);
  CHECK(a.histogram.counts == b.histogram.counts);
  CHECK(a.final_states == b.final_states);

  std::vector<Region> custom{Region::custom("K1", [](State s) { return std::fabs(s.x + 1.0) <= 0.2; }),
                             Region::custom("K3", [](State s) { return std::fabs(s.x - 1.0) <= 0.2; })};
  const auto d = run_ensemble(p, c, 37, custom, one);
  CHECK(d.histogram.counts == a.histogram.counts);
  CHECK(d.final_states == a.final_states);

  // path i of an ensemble is the same whatever the ensemble size
  const auto small = run_ensemble(p, c, 5, regions, one);
  for (std::size_t i = 0; i < 5; ++i) CHECK(small.final_states[i] == a.final_states[i]);
}

TEST_CASE("run_ensemble: noiseless paths settle in K1") {
  Params p;
  p.epsilon = 0.0;
  const std::vector<Region> regions{Region::band("K1", -1.0, 0.1)};
  double prev = 0.0;
  for (double T : {5.0, 20.0, 80.0}) {
    SimConfig c;
    c.t_final = T;
    c.initial = {-0.05, 0.5};
    const double f = run_ensemble(p, c, 2, regions).histogram.fraction(0);
    CHECK(f > prev);
    prev = f;
  }
  CHECK(prev > 0.95);
}

TEST_CASE("run_ensemble reports the failing path") {
  Params p;
  SimConfig c;
  c.dt = 1e-2;
  c.t_final = 1.0;
  EnsembleOptions o;
  o.initial = [](std::size_t i) { return State{i == 3 ? 1e60 : 0.0, 0.0}; };
  try {
    run_ensemble(p, c, 5, {Region::whole_plane("all")}, o);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("path 3") != std::string::npos);
  }
  CHECK_THROWS_AS(run_ensemble(p, c, 0, {Region::whole_plane("all")}), ConfigError);
}

TEST_CASE("time average of W stays below alpha1 / alpha2") {
  Params p;
  p.sigma1 = 0.3;
  p.epsilon = p.epsilon0 * 0.9;
  const auto cert = find_certificate(p);
  REQUIRE(cert.ok());
  const double alpha = cert.certificate->alpha();
  SimConfig c;
  c.t_final = 200.0;
  c.initial = {2.5, -2.5};
  const auto t = simulate_sde(p, c);
  double avg = 0.0;
  for (const auto& s : t.states) avg += lyapunov_W(alpha, s);
  avg /= static_cast<double>(t.size());
  CHECK(avg < cert.certificate->alpha1() / cert.certificate->alpha2());
}

TEST_CASE("deviation from the flow shrinks with the noise level") {
  auto median_dev = [](double eps) {
    Params p;
    p.epsilon = eps;
    p.sigma1 = 0.2;
    Params flow = p;
    flow.epsilon = 0.0;
    std::vector<double> dev;
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      SimConfig c;
      c.t_final = 3.0;
      c.seed = seed;
      c.initial = {0.5, 0.2};
      const auto a = simulate_sde(p, c);
      const auto b = simulate_sde(flow, c);
      double m = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::hypot(a.states[i].x - b.states[i].x, a.states[i].y - b.states[i].y));
      }
      dev.push_back(m);
    }
    std::nth_element(dev.begin(), dev.begin() + 7, dev.end());
    return dev[7];
  };
  const double a = median_dev(0.2), b = median_dev(0.1), c = median_dev(0.05);
  CHECK(a > b);
  CHECK(b > c);
}

TEST_CASE("stationary marginal matches direct quadrature of the density") {
  Params p;
  p.epsilon = 0.35;
  const StationaryMarginal m(p);
  const double s2 = std::pow(p.epsilon * std::cos(p.theta) * p.sigma0, 2);
  auto dens = [&](double x) { return std::exp((p.lambda1 / s2) * (x * x - 0.5 * x * x * x * x)); };
  const double z = testing::gauss_legendre(dens, -4, 4, 4000);
  const double k1 = testing::gauss_legendre(dens, -1.1, -0.9, 400) / z;
  CHECK(m.probability(-1.1, -0.9) == doctest::Approx(k1).epsilon(1e-6));
  CHECK(m.probability(-1.1, -0.9) == doctest::Approx(m.probability(0.9, 1.1)).epsilon(1e-9));
  CHECK(m.probability(-10, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

  Params q = p;
  q.sigma1 = 0.5;
  q.epsilon = 0.25;
  const StationaryMarginal r(q);
  CHECK(r.probability(-1.1, -0.9) > 10 * r.probability(0.9, 1.1));

  const auto starts = stratified_stationary_initials(q, 16);
  REQUIRE(starts.size() == 16);
  for (std::size_t i = 1; i < starts.size(); ++i) CHECK(starts[i].x > starts[i - 1].x);
}

TEST_CASE("ensemble counts agree between kernel backends") {
  if (!kernels::avx2_table()) return;
  Params p;
  p.epsilon = 0.4;
  p.sigma1 = 0.3;
  SimConfig c;
  c.t_final = 20.0;
  const std::vector<Region> regions{Region::band("K1", -1.0, 0.1), Region::band("K3", 1.0, 0.1),
                                    Region::outside_ball("far", 1.5)};
  const kernels::KernelTable* before = &kernels::active();
  kernels::set_active(kernels::Backend::scalar);
  const auto a = run_ensemble(p, c, 21, regions);
  kernels::set_active(kernels::Backend::avx2);
  const auto b = run_ensemble(p, c, 21, regions);
  kernels::set_active(before == &kernels::scalar_table() ? kernels::Backend::scalar : kernels::Backend::avx2);
  CHECK(a.histogram.counts == b.histogram.counts);
  CHECK(a.final_states == b.final_states);
}
