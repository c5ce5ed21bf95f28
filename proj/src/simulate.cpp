#include "fwdegen/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "fwdegen/errors.hpp"

namespace fwdegen {

namespace {

std::string describe(double t, State s) {
  std::ostringstream os;
  os.precision(17);
  os << "t = " << t << ", state = (" << s.x << ", " << s.y << ")";
  return os.str();
}

bool finite(State s) { return std::isfinite(s.x) && std::isfinite(s.y); }

Vec2 add(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }

State advance(State s, Vec2 v, double h) { return {s.x + h * v.x, s.y + h * v.y}; }

// Classical RK4 for a non-autonomous field.
template <class Field>
Trajectory integrate_rk4(const SimConfig& c, Field&& field) {
  const std::size_t n = step_count(c);
  Trajectory out;
  out.times.resize(n + 1);
  out.states.resize(n + 1);
  State s = c.initial;
  out.times[0] = 0.0;
  out.states[0] = s;
  const double h = c.dt;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const Vec2 k1 = field(t, s);
    const Vec2 k2 = field(t + 0.5 * h, advance(s, k1, 0.5 * h));
    const Vec2 k3 = field(t + 0.5 * h, advance(s, k2, 0.5 * h));
    const Vec2 k4 = field(t + h, advance(s, k3, h));
    s = {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
         s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
    const double t_next = static_cast<double>(k + 1) * h;
    if (!finite(s)) throw NumericalError("nonfinite state in flow integration at " + describe(t_next, s));
    out.times[k + 1] = t_next;
    out.states[k + 1] = s;
  }
  return out;
}

}  // namespace

void check_config(const Params& p, const SimConfig& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be positive");
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) throw ConfigError("t_final must be positive");
  if (c.dt > c.t_final) throw ConfigError("dt must not exceed t_final");
  if (!(p.lambda1 * c.dt < 0.1)) throw ConfigError("step too large: lambda1 * dt must be < 0.1");
  if (!finite(c.initial)) throw ConfigError("initial state must be finite");
}

std::size_t step_count(const SimConfig& c) {
  return static_cast<std::size_t>(std::ceil(c.t_final / c.dt - 1e-9));
}

IncrementStream::IncrementStream(std::uint64_t seed, std::uint64_t path_index, double dt)
    : scale_(std::sqrt(dt)) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path_index),
                    static_cast<std::uint32_t>(path_index >> 32), 0x6677u};
  engine_.seed(seq);
}

SdeIncrement sde_increment(const Params& p, State s, double dt, double dw) {
  const auto c = kernels::coefficients(p);
  const double cubic = s.x * (1.0 - s.x * s.x);
  const double noise = (c.epsilon * (c.sigma0 + c.sigma1 * s.x)) * dw;
  return {{(c.lambda1 * cubic) * dt, (c.lambda3 * cubic - c.lambda2 * s.y) * dt},
          {c.cos_theta * noise, c.sin_theta * noise}};
}

State step_sde(const Params& p, State s, double dt, double dw) {
  kernels::ref::euler_maruyama_step(kernels::coefficients(p), dt, dw, s.x, s.y);
  return s;
}

Trajectory simulate_sde(const Params& p, const SimConfig& c) {
  check_config(p, c);
  const auto coeff = kernels::coefficients(p);
  const std::size_t n = step_count(c);
  IncrementStream noise(c.seed, 0, c.dt);
  Trajectory out;
  out.times.resize(n + 1);
  out.states.resize(n + 1);
  State s = c.initial;
  out.times[0] = 0.0;
  out.states[0] = s;
  for (std::size_t k = 0; k < n; ++k) {
    kernels::ref::euler_maruyama_step(coeff, c.dt, noise.next(), s.x, s.y);
    const double t = static_cast<double>(k + 1) * c.dt;
    if (!finite(s)) {
      throw NumericalError("nonfinite state in SDE path at " + describe(t, s) +
                           "; last finite " + describe(out.times[k], out.states[k]));
    }
    out.times[k + 1] = t;
    out.states[k + 1] = s;
  }
  return out;
}

Trajectory simulate_flow(const Params& p, const SimConfig& c) {
  check_config(p, c);
  return integrate_rk4(c, [&](double, State s) { return drift(p, s); });
}

Trajectory simulate_controlled(const Params& p, const SimConfig& c, const Control& phi) {
  check_config(p, c);
  const double ct = std::cos(p.theta);
  const double st = std::sin(p.theta);
  return integrate_rk4(c, [&](double t, State s) {
    const double push = p.epsilon * diffusion_coeff(p, s.x) * phi(t);
    return add(drift(p, s), {ct * push, st * push});
  });
}

double accessibility_gain(const Params& p, double delta, double margin) {
  const double floor_sigma = p.sigma0 - std::fabs(p.sigma1) * (1.0 + delta);
  if (!(floor_sigma > 0.0)) {
    throw ConfigError("sigma0 - |sigma1| (1 + delta) must be positive for the accessibility control");
  }
  const double ct = std::cos(p.theta);
  if (!(p.epsilon > 0.0) || ct == 0.0) throw ConfigError("accessibility control needs eps > 0 and cos(theta) != 0");
  if (!(margin > 1.0)) throw ConfigError("margin must exceed 1");
  // k eps sigma(x) cos(theta) > 1 + lambda1 on the whole interval.
  return margin * (1.0 + p.lambda1) / (floor_sigma * ct * p.epsilon);
}

std::optional<double> first_time_below(const Trajectory& t, double level) {
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.states[k].x <= level) return t.times[k];
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Regions and histograms
// ---------------------------------------------------------------------------

Region Region::band(std::string name, double center_x, double half_width) {
  if (!(half_width >= 0.0)) throw ConfigError("band half-width must be nonnegative");
  return Region(std::move(name), kernels::RegionTest{kernels::RegionTest::Kind::band, center_x, half_width}, {});
}

Region Region::outside_ball(std::string name, double radius) {
  if (!(radius >= 0.0)) throw ConfigError("ball radius must be nonnegative");
  return Region(std::move(name),
                kernels::RegionTest{kernels::RegionTest::Kind::outside_ball, radius * radius, 0.0}, {});
}

Region Region::whole_plane(std::string name) {
  return Region(std::move(name), kernels::RegionTest{kernels::RegionTest::Kind::whole_plane, 0.0, 0.0}, {});
}

Region Region::custom(std::string name, std::function<bool(State)> predicate) {
  return Region(std::move(name), std::nullopt, std::move(predicate));
}

bool Region::contains(State s) const {
  if (test_) return kernels::ref::in_region(*test_, s.x, s.y);
  return predicate_(s);
}

double OccupationHistogram::fraction(std::size_t region) const {
  if (counted_steps == 0) return 0.0;
  return static_cast<double>(counts[region]) / static_cast<double>(counted_steps);
}

std::optional<std::size_t> OccupationHistogram::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i] == name) return i;
  }
  return std::nullopt;
}

void OccupationHistogram::merge(const OccupationHistogram& other) {
  if (regions.empty() && counted_steps == 0 && counts.empty()) {
    *this = other;
    return;
  }
  if (other.regions != regions || other.dt != dt || other.burn_in != burn_in) {
    throw ConfigError("cannot merge occupation histograms with different regions or time grids");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  counted_steps += other.counted_steps;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kGroupLanes = 16;
constexpr std::size_t kBlockSteps = 512;

struct Group {
  std::size_t first_path;
  std::size_t lanes;
};

struct GroupOutput {
  std::vector<std::uint64_t> counts;  // [region][lane]
  std::vector<State> finals;
};

GroupOutput run_group(const Params& p, const SimConfig& base, const Group& g,
                      const std::vector<Region>& regions, std::size_t burn_steps, std::size_t n_steps,
                      const EnsembleOptions& options) {
  const std::size_t lanes = g.lanes;
  const std::size_t n_regions = regions.size();
  const auto coeff = kernels::coefficients(p);

  std::vector<kernels::RegionTest> tests;
  bool kernel_regions = n_regions <= kernels::kMaxKernelRegions;
  for (const auto& r : regions) {
    if (auto t = r.kernel_test()) tests.push_back(*t);
    else kernel_regions = false;
  }

  std::vector<double> x(lanes), y(lanes);
  std::vector<IncrementStream> streams;
  streams.reserve(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    const std::size_t path = g.first_path + l;
    const State s0 = options.initial ? options.initial(path) : base.initial;
    x[l] = s0.x;
    y[l] = s0.y;
    streams.emplace_back(base.seed, path, base.dt);
  }

  GroupOutput out;
  out.counts.assign(n_regions * lanes, 0);
  std::vector<double> dw(kBlockSteps * lanes);
  std::vector<double> x_before(lanes), y_before(lanes);
  const auto& table = kernels::active();

  std::size_t done = 0;
  while (done < n_steps) {
    // Split blocks at the burn-in boundary so each block is either all
    // counted or all skipped.
    const std::size_t limit = done < burn_steps ? burn_steps : n_steps;
    const std::size_t steps = std::min(kBlockSteps, limit - done);
    const bool count = done >= burn_steps;

    for (std::size_t l = 0; l < lanes; ++l) {
      for (std::size_t k = 0; k < steps; ++k) dw[k * lanes + l] = streams[l].next();
    }
    x_before = x;
    y_before = y;

    if (kernel_regions) {
      kernels::StepBlock block{lanes, steps, base.dt, x.data(), y.data(), dw.data(),
                               tests.data(), n_regions, out.counts.data(), count};
      table.euler_maruyama_block(coeff, block);
    } else {
      for (std::size_t l = 0; l < lanes; ++l) {
        for (std::size_t k = 0; k < steps; ++k) {
          kernels::ref::euler_maruyama_step(coeff, base.dt, dw[k * lanes + l], x[l], y[l]);
          if (count) {
            for (std::size_t r = 0; r < n_regions; ++r) out.counts[r * lanes + l] += regions[r].contains({x[l], y[l]});
          }
        }
      }
    }

    for (std::size_t l = 0; l < lanes; ++l) {
      if (!std::isfinite(x[l]) || !std::isfinite(y[l])) {
        const double t0 = static_cast<double>(done) * base.dt;
        const double t1 = static_cast<double>(done + steps) * base.dt;
        std::ostringstream os;
        os.precision(17);
        os << "path " << (g.first_path + l) << ": nonfinite state within t in [" << t0 << ", " << t1
           << "]; last finite " << describe(t0, {x_before[l], y_before[l]});
        throw NumericalError(os.str());
      }
    }
    done += steps;
  }

  out.finals.resize(lanes);
  for (std::size_t l = 0; l < lanes; ++l) out.finals[l] = {x[l], y[l]};
  return out;
}

}  // namespace

EnsembleResult run_ensemble(const Params& p, const SimConfig& base, std::size_t n_paths,
                            const std::vector<Region>& regions, const EnsembleOptions& options) {
  check_config(p, base);
  if (n_paths == 0) throw ConfigError("n_paths must be at least 1");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0)) {
    throw ConfigError("burn_in_fraction must be in [0, 1)");
  }

  const std::size_t n_steps = step_count(base);
  const auto burn_steps =
      static_cast<std::size_t>(std::llround(options.burn_in_fraction * static_cast<double>(n_steps)));

  std::vector<Group> groups;
  for (std::size_t first = 0; first < n_paths; first += kGroupLanes) {
    groups.push_back({first, std::min(kGroupLanes, n_paths - first)});
  }

  std::vector<GroupOutput> outputs(groups.size());
  std::vector<std::exception_ptr> errors(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t gi = next.fetch_add(1); gi < groups.size(); gi = next.fetch_add(1)) {
      try {
        outputs[gi] = run_group(p, base, groups[gi], regions, burn_steps, n_steps, options);
      } catch (...) {
        errors[gi] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, groups.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleResult result;
  auto& h = result.histogram;
  for (const auto& r : regions) h.regions.push_back(r.name());
  h.counts.assign(regions.size(), 0);
  h.dt = base.dt;
  h.burn_in = static_cast<double>(burn_steps) * base.dt;
  result.final_states.reserve(n_paths);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& o = outputs[gi];
    const std::size_t lanes = groups[gi].lanes;
    for (std::size_t r = 0; r < regions.size(); ++r) {
      for (std::size_t l = 0; l < lanes; ++l) h.counts[r] += o.counts[r * lanes + l];
    }
    h.counted_steps += static_cast<std::uint64_t>(lanes) * (n_steps - burn_steps);
    result.final_states.insert(result.final_states.end(), o.finals.begin(), o.finals.end());
  }
  return result;
}

}  // namespace fwdegen
