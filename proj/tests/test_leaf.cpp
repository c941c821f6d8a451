#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "marsim/leaf.hpp"
#include "marsim/synth.hpp"
#include "oracles.hpp"

using namespace marsim;
using Catch::Approx;

namespace {
ClientSpec client(int fps, double l1, double l2, double l_max = 12.0) {
  ClientSpec c;
  c.fps = fps;
  c.lambda1 = l1;
  c.lambda2 = l2;
  c.l_max = l_max;
  return c;
}
}  // namespace

TEST_CASE("update_frequency finds the grid-global frequency minimum") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const ClientSpec spec = client(15, 0.3, 1.8);
  Configuration cfg{1.0, 320.0, 100.0};

  const double f_star = update_frequency(p, spec, cfg, scfg);
  Configuration best = cfg;
  best.f = f_star;
  const double q_star = objective_term(p, spec, best);
  for (double f = p.f_min; f <= p.f_max; f += 1e-3) {
    Configuration probe = cfg;
    probe.f = f;
    CHECK(q_star <= objective_term(p, spec, probe) + 1e-9);
  }
}

TEST_CASE("update_frequency is a fixed point at a stationary minimum") {
  const DeviceProfile p = default_profile();
  SolverConfig scfg;
  const ClientSpec spec = client(15, 0.0, 0.0);
  Configuration cfg{1.0, 320.0, 100.0};

  const double f_star = update_frequency(p, spec, cfg, scfg);
  cfg.f = f_star;
  // Re-running from the minimizer stays put.
  CHECK(update_frequency(p, spec, cfg, scfg) == Approx(f_star).margin(1e-4));
}

TEST_CASE("update_frequency clamps a descent direction past the box") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  // A heavily latency-weighted client wants frequency beyond the top of the
  // box; the projection pins the update at f_max.
  const ClientSpec spec = client(30, 50.0, 0.0);
  Configuration cfg{2.0, 608.0, 10.0};
  const double f_star = update_frequency(p, spec, cfg, scfg);
  CHECK(f_star == Approx(p.f_max).margin(1e-9));

  Configuration at_top = cfg;
  at_top.f = f_star;
  CHECK(objective_gradient(p, spec, at_top).df < 0.0);
}

TEST_CASE("update_model_size collapses to s_min without accuracy weight") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const ClientSpec spec = client(15, 2.0, 0.0);
  Configuration cfg{1.49, 400.0, 100.0};
  CHECK(update_model_size(p, spec, cfg, scfg) ==
        Approx(p.s_min()).margin(1e-6));
}

TEST_CASE("update_model_size clamps to s_max under a dominant accuracy pull") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const ClientSpec spec = client(2, 0.0, 1000.0);
  Configuration cfg{2.4, 500.0, 150.0};
  CHECK(update_model_size(p, spec, cfg, scfg) ==
        Approx(p.s_max()).margin(1e-9));
}

TEST_CASE("update_model_size tracks the 1-pixel grid minimizer") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const ClientSpec spec = client(15, 0.3, 1.8);
  Configuration cfg{1.49, 300.0, 100.0};

  const double s_star = update_model_size(p, spec, cfg, scfg);
  const double grid_star =
      oracle::grid_min(p.s_min(), p.s_max(), 1.0, [&](double s) {
        Configuration probe = cfg;
        probe.s = s;
        return objective_term(p, spec, probe);
      });
  CHECK(std::abs(s_star - grid_star) <= 2.0);
}

TEST_CASE("two identical clients split the bandwidth evenly") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const std::vector<ClientSpec> specs = {client(15, 0.3, 1.8),
                                         client(15, 0.3, 1.8)};
  const std::vector<Configuration> cfgs = {{1.2, 320.0, 1.0},
                                           {1.2, 320.0, 1.0}};
  const auto [b, duals] = allocate_bandwidth(p, specs, cfgs, scfg, 80.0);
  CHECK(b[0] == Approx(b[1]).epsilon(1e-9));
  CHECK(b[0] + b[1] == Approx(80.0).epsilon(1e-6));
  CHECK(duals.mu > 0.0);
}

TEST_CASE("a single client takes the whole budget") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const std::vector<ClientSpec> specs = {client(9, 0.3, 1.8)};
  const std::vector<Configuration> cfgs = {{1.0, 224.0, 1.0}};
  const auto [b, duals] = allocate_bandwidth(p, specs, cfgs, scfg, 55.0);
  CHECK(b[0] == Approx(55.0).epsilon(1e-6));
}

TEST_CASE("three heterogeneous clients match the numeric convex solver") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  const std::vector<ClientSpec> specs = {client(9, 0.3, 1.8),
                                         client(30, 0.3, 1.8),
                                         client(16, 0.3, 1.8)};
  const std::vector<Configuration> cfgs = {
      {1.0, 320.0, 1.0}, {1.5, 224.0, 1.0}, {2.0, 416.0, 1.0}};
  const double b_max = 100.0;

  const auto [b, duals] = allocate_bandwidth(p, specs, cfgs, scfg, b_max);

  auto objective = [&](const std::vector<double>& x) {
    double q = 0.0;
    for (std::size_t k = 0; k < specs.size(); ++k) {
      Configuration c = cfgs[k];
      c.b = x[k];
      q += objective_term(p, specs[k], c);
    }
    return q;
  };
  const std::vector<double> lo = {1e-3, 1e-3, 1e-3};
  const std::vector<double> reference = oracle::projected_gradient_bandwidth(
      objective, {b_max / 3, b_max / 3, b_max / 3}, lo, b_max);

  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(b[k] == Approx(reference[k]).epsilon(1e-3));
  }

  // KKT residuals at the returned point.
  const double sum_b = std::accumulate(b.begin(), b.end(), 0.0);
  CHECK(std::abs(duals.mu * (sum_b - b_max)) < 1e-4);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    Configuration c = cfgs[k];
    c.b = b[k];
    const double lat = latency_per_frame(p, c).total;
    CHECK(std::abs(duals.beta[k] * (lat - specs[k].l_max)) < 1e-4);
    CHECK(lat <= specs[k].l_max + 1e-9);
  }
}

TEST_CASE("a binding latency bound lifts its client's bandwidth floor") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  std::vector<ClientSpec> specs = {client(9, 0.3, 1.8), client(30, 0.3, 1.8)};
  std::vector<Configuration> cfgs = {{1.5, 320.0, 1.0}, {1.5, 320.0, 1.0}};

  // Client 0 must finish fast; its transmission share cannot shrink freely.
  Configuration probe = cfgs[0];
  probe.b = 30.0;
  const double lat_even = latency_per_frame(p, probe).total;
  specs[0].l_max = lat_even * 0.98;
  specs[1].l_max = 12.0;

  const auto [b, duals] = allocate_bandwidth(p, specs, cfgs, scfg, 60.0);
  Configuration c0 = cfgs[0];
  c0.b = b[0];
  CHECK(latency_per_frame(p, c0).total <= specs[0].l_max + 1e-9);
  CHECK(duals.beta[0] > 0.0);
  CHECK(b[0] > 30.0);
  CHECK(b[0] + b[1] == Approx(60.0).epsilon(1e-6));
}

TEST_CASE("infeasible latency bounds raise a certificate") {
  const DeviceProfile p = default_profile();
  const SolverConfig scfg;
  std::vector<ClientSpec> specs = {client(9, 0.3, 1.8)};
  std::vector<Configuration> cfgs = {{1.0, 608.0, 1.0}};
  // L_cv + L_inf at s=608 is ~3.1 s; no bandwidth can reach 1 s.
  specs[0].l_max = 1.0;
  try {
    allocate_bandwidth(p, specs, cfgs, scfg, 1000.0);
    FAIL("expected InfeasibleAllocation");
  } catch (const InfeasibleAllocation& e) {
    REQUIRE(e.clients().size() == 1);
    CHECK(e.clients()[0] == 0);
    CHECK(std::isinf(e.required_bandwidth()[0]));
  }
}

TEST_CASE("solve reduces to a grid search for one unconstrained client") {
  const DeviceProfile p = default_profile();
  SolverConfig scfg;
  scfg.tau = 1e-6;
  const std::vector<ClientSpec> specs = {client(15, 0.0, 0.0, 20.0)};
  const double b_max = 5000.0;

  const Allocation alloc = solve(p, specs, scfg, b_max);

  double grid_best = std::numeric_limits<double>::infinity();
  for (double s : p.model_sizes) {
    for (double f = p.f_min; f <= p.f_max; f += 2e-3) {
      Configuration c{f, s, b_max};
      grid_best = std::min(grid_best, objective_term(p, specs[0], c));
    }
  }
  CHECK(alloc.q_value <= grid_best + 1e-6);
  CHECK(alloc.configs[0].b == Approx(b_max).epsilon(1e-6));
}

TEST_CASE("a loose tolerance stops the outer loop within two cycles") {
  const DeviceProfile p = default_profile();
  SolverConfig scfg;
  scfg.tau = 0.5;
  for (int fps : {2, 15, 30}) {
    const std::vector<ClientSpec> specs = {client(fps, 0.3, 1.8),
                                           client(5, 0.1, 3.0)};
    const Allocation alloc = solve(p, specs, scfg, 120.0);
    CHECK(alloc.outer_iters <= 2);
    CHECK(alloc.converged);
  }
}

TEST_CASE("solve returns feasible allocations with a descending trace") {
  const DeviceProfile p = default_profile();
  SolverConfig scfg;
  SplitMix64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = rng.uniform_int(1, 5);
    std::vector<ClientSpec> specs;
    for (int i = 0; i < k; ++i) {
      specs.push_back(client(rng.uniform_int(1, 30), rng.uniform(0.0, 1.0),
                             rng.uniform(0.0, 6.0), rng.uniform(4.0, 12.0)));
    }
    const double b_max = rng.uniform(50.0, 400.0);
    const Allocation alloc = solve(p, specs, scfg, b_max);

    for (std::size_t i = 1; i < alloc.trace.size(); ++i) {
      CHECK(alloc.trace[i] <= alloc.trace[i - 1] + 1e-9);
    }
    double sum_b = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const Configuration& c = alloc.configs[i];
      sum_b += c.b;
      CHECK(c.f >= p.f_min);
      CHECK(c.f <= p.f_max);
      CHECK(std::find(p.model_sizes.begin(), p.model_sizes.end(), c.s) !=
            p.model_sizes.end());
      CHECK(latency_per_frame(p, c).total <= specs[i].l_max * (1 + 1e-9));
    }
    CHECK(sum_b <= b_max + 1e-6);
    CHECK(alloc.rounding_gap == std::abs(alloc.q_value - alloc.q_relaxed));
  }
}

TEST_CASE("an exhausted outer cap reports non-convergence") {
  const DeviceProfile p = default_profile();
  SolverConfig scfg;
  scfg.max_outer_iters = 1;  // the relative-Q check needs two cycles
  const std::vector<ClientSpec> specs = {client(15, 0.3, 1.8)};
  const Allocation alloc = solve(p, specs, scfg, 100.0);
  CHECK_FALSE(alloc.converged);
  CHECK(alloc.outer_iters == 1);
  CHECK(alloc.trace.size() == 1);
}

TEST_CASE("constant-step mu updates reach the same split on mild instances") {
  const DeviceProfile p = default_profile();
  SolverConfig subgrad;
  subgrad.mu_exact_step = false;
  const SolverConfig exact;
  const std::vector<ClientSpec> specs = {client(12, 0.3, 1.8),
                                         client(25, 0.3, 1.8)};
  const std::vector<Configuration> cfgs = {{1.2, 224.0, 1.0},
                                           {1.8, 320.0, 1.0}};
  const auto [b_sub, d_sub] = allocate_bandwidth(p, specs, cfgs, subgrad, 90.0);
  const auto [b_ex, d_ex] = allocate_bandwidth(p, specs, cfgs, exact, 90.0);
  REQUIRE(b_sub.size() == b_ex.size());
  for (std::size_t k = 0; k < b_sub.size(); ++k) {
    CHECK(b_sub[k] == Approx(b_ex[k]).epsilon(1e-4));
  }
}

TEST_CASE("finite-difference gradient mode reaches the same minimizers") {
  const DeviceProfile p = default_profile();
  SolverConfig analytic;
  SolverConfig fd;
  fd.use_fd_gradients = true;
  const ClientSpec spec = client(15, 0.3, 1.8);
  Configuration cfg{1.0, 320.0, 100.0};
  CHECK(update_frequency(p, spec, cfg, analytic) ==
        Approx(update_frequency(p, spec, cfg, fd)).margin(1e-3));
  CHECK(update_model_size(p, spec, cfg, analytic) ==
        Approx(update_model_size(p, spec, cfg, fd)).margin(1.0));
}
