#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "marsim/energy_model.hpp"
#include "marsim/errors.hpp"
#include "marsim/profile.hpp"

namespace marsim {

struct SolverConfig {
  double gamma = 0.02;    // projected-gradient step for f, GHz scale
  double eta = 4000.0;    // projected-gradient step for s, pixel scale
  // Dual step multipliers: damping on the curvature-derived subgradient
  // steps (beta steps rescale with the iterate; the constant-step mu
  // fallback scales from the entry estimate).
  double theta_mu = 0.5;
  double theta_beta = 0.5;
  // The bandwidth budget binds at every optimum (more bandwidth always
  // lowers Q), so mu's maximizer given beta has a closed form. The default
  // takes that exact step each iteration; disabling it falls back to the
  // constant-step subgradient update scaled by theta_mu.
  bool mu_exact_step = true;
  double tau = 1e-4;             // outer-loop relative-Q tolerance
  int max_outer_iters = 200;
  int max_inner_iters = 10000;
  int max_dual_iters = 20000;
  double inner_tol = 1e-6;       // absolute, on the block variable
  // mu warm start. Zero (the default) starts the dual loop at the exact
  // stationary multiplier of the unconstrained-latency case, from which the
  // constant-step iteration converges quickly; a positive value forces a
  // specific start instead.
  double mu_init = 0.0;
  double mu_floor = 1e-9;        // keeps the closed-form bandwidth defined
  double dual_tol = 1e-6;        // complementary-slackness product target
  bool use_fd_gradients = false; // finite-difference fallback for experiments
};

struct DualState {
  double mu = 0.0;
  std::vector<double> beta;
};

struct Allocation {
  std::vector<Configuration> configs;
  double q_value = 0.0;    // objective at the rounded, re-allocated point
  double q_relaxed = 0.0;  // objective when the outer loop stopped
  double rounding_gap = 0.0;
  std::vector<double> trace;  // Q after each outer cycle
  bool converged = false;     // relative-Q criterion met before the cap
  int outer_iters = 0;
  DualState duals;
};

namespace detail {

inline ConfigGradient pick_gradient(const DeviceProfile& p,
                                    const ClientSpec& spec,
                                    const Configuration& cfg,
                                    const SolverConfig& scfg) {
  return scfg.use_fd_gradients ? objective_gradient_fd(p, spec, cfg)
                               : objective_gradient(p, spec, cfg);
}

struct Interval {
  double lo;
  double hi;
};

// Latency with the given block value substituted.
template <typename Sub>
double latency_at(const DeviceProfile& p, Configuration cfg, Sub&& sub,
                  double x) {
  sub(cfg, x);
  return latency_per_frame(p, cfg).total;
}

// Feasible frequency interval given fixed (s, b): latency falls with f, so
// the bound cuts the interval from below. Falls back to the plain box when
// no frequency can meet the bound (the bandwidth stage reports that case).
inline Interval frequency_interval(const DeviceProfile& p,
                                   const Configuration& cfg, double l_max) {
  auto sub = [](Configuration& c, double x) { c.f = x; };
  Interval box{p.f_min, p.f_max};
  if (!(l_max > 0.0)) return box;
  if (latency_at(p, cfg, sub, box.hi) > l_max) return box;
  if (latency_at(p, cfg, sub, box.lo) <= l_max) return box;
  double lo = box.lo;
  double hi = box.hi;
  for (int i = 0; i < 80 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (latency_at(p, cfg, sub, mid) > l_max ? lo : hi) = mid;
  }
  return {hi, box.hi};
}

// Feasible size interval given fixed (f, b): latency grows with s, so the
// bound cuts from above.
inline Interval size_interval(const DeviceProfile& p, const Configuration& cfg,
                              double l_max) {
  auto sub = [](Configuration& c, double x) { c.s = x; };
  Interval box{p.s_min(), p.s_max()};
  if (!(l_max > 0.0)) return box;
  if (latency_at(p, cfg, sub, box.lo) > l_max) return box;
  if (latency_at(p, cfg, sub, box.hi) <= l_max) return box;
  double lo = box.lo;
  double hi = box.hi;
  for (int i = 0; i < 80 && hi - lo > 1e-9; ++i) {
    const double mid = 0.5 * (lo + hi);
    (latency_at(p, cfg, sub, mid) > l_max ? hi : lo) = mid;
  }
  return {box.lo, lo};
}

// Constant-step projected gradient on an interval, with step halving so each
// accepted move never increases the objective.
template <typename Eval, typename Grad>
double projected_gradient_1d(double start, const Interval& iv, double step0,
                             double tol, int max_iters, Eval&& value,
                             Grad&& grad) {
  auto proj = [&](double x) { return std::clamp(x, iv.lo, iv.hi); };
  double x = proj(start);
  double qx = value(x);
  for (int it = 0; it < max_iters; ++it) {
    const double d = grad(x);
    double step = step0;
    double xn = proj(x - step * d);
    double qn = value(xn);
    int halvings = 0;
    while (qn > qx && halvings < 48) {
      step *= 0.5;
      xn = proj(x - step * d);
      qn = value(xn);
      ++halvings;
    }
    if (qn > qx) break;  // no descent available at this scale
    const double moved = std::abs(xn - x);
    x = xn;
    qx = qn;
    if (moved <= tol) break;
  }
  return x;
}

// Runs the projected-gradient iteration from several seeds across the
// interval and keeps the lowest objective value. The current point is always
// a seed, so the update never worsens a feasible iterate.
template <typename Eval, typename Grad>
double multistart_descent(double current, const Interval& iv, double step0,
                          double tol, int max_iters, Eval&& value,
                          Grad&& grad) {
  const double seeds[4] = {current, iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi};
  double best_x = std::clamp(current, iv.lo, iv.hi);
  double best_q = value(best_x);
  for (double seed : seeds) {
    const double x = projected_gradient_1d(seed, iv, step0, tol, max_iters,
                                           value, grad);
    const double q = value(x);
    if (q < best_q) {
      best_q = q;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace detail

// Projected-gradient update of one client's CPU frequency with the other
// blocks held fixed.
inline double update_frequency(const DeviceProfile& p, const ClientSpec& spec,
                               const Configuration& cfg,
                               const SolverConfig& scfg) {
  const detail::Interval iv = detail::frequency_interval(p, cfg, spec.l_max);
  auto value = [&](double f) {
    Configuration c = cfg;
    c.f = f;
    return objective_term(p, spec, c);
  };
  auto grad = [&](double f) {
    Configuration c = cfg;
    c.f = f;
    return detail::pick_gradient(p, spec, c, scfg).df;
  };
  return detail::multistart_descent(cfg.f, iv, scfg.gamma, scfg.inner_tol,
                                    scfg.max_inner_iters, value, grad);
}

// Projected-gradient update of one client's relaxed model size.
inline double update_model_size(const DeviceProfile& p, const ClientSpec& spec,
                                const Configuration& cfg,
                                const SolverConfig& scfg) {
  const detail::Interval iv = detail::size_interval(p, cfg, spec.l_max);
  auto value = [&](double s) {
    Configuration c = cfg;
    c.s = s;
    return objective_term(p, spec, c);
  };
  auto grad = [&](double s) {
    Configuration c = cfg;
    c.s = s;
    return detail::pick_gradient(p, spec, c, scfg).ds;
  };
  return detail::multistart_descent(cfg.s, iv, scfg.eta, scfg.inner_tol,
                                    scfg.max_inner_iters, value, grad);
}

// Bandwidth split for fixed frequencies and sizes: closed-form per-client
// bandwidth from the stationarity condition, duals driven by projected
// subgradient ascent until the KKT residuals vanish.
inline std::pair<std::vector<double>, DualState> allocate_bandwidth(
    const DeviceProfile& p, const std::vector<ClientSpec>& specs,
    const std::vector<Configuration>& configs, const SolverConfig& scfg,
    double b_max) {
  const std::size_t count = specs.size();
  if (count == 0 || configs.size() != count) {
    throw std::invalid_argument("allocate_bandwidth: empty or mismatched input");
  }
  if (!(b_max > 0.0)) {
    throw std::invalid_argument("allocate_bandwidth: b_max must be > 0");
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> a(count);          // L_tr = a / b
  std::vector<double> fixed_lat(count);  // L_cv + L_inf
  std::vector<double> d_coef(count);     // objective weight on L_tr
  std::vector<double> b_min(count);

  const double p_tr0 = eval_poly(p.p_tr_coeffs, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const Configuration& c = configs[k];
    detail::check_frequency(p, c.f);
    const double rstar = eval_poly(p.r_star_coeffs, c.f);
    a[k] = detail::payload_megabits(p, c.s) / (p.r_max_slope * rstar);
    const double norm_side = c.s / p.l_inf_norm;
    fixed_lat[k] = eval_poly(p.l_cv_coeffs, c.f) +
                   eval_poly(p.l_inf_coeffs, norm_side * norm_side);
    const double gen = eval_poly(p.e_gt_coeffs, c.f) +
                       eval_poly(p.e_prv_coeffs, c.f);
    d_coef[k] = specs[k].fps * gen + p_tr0 + eval_poly(p.p_bs_coeffs, c.f) +
                specs[k].lambda1;
    const double slack = specs[k].l_max - fixed_lat[k];
    b_min[k] = slack > 0.0 ? a[k] / slack : inf;
  }

  const double total_min = std::accumulate(b_min.begin(), b_min.end(), 0.0);
  if (!(total_min <= b_max)) {
    // Build the smallest client set whose demands alone exceed the budget.
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return b_min[i] > b_min[j]; });
    std::vector<int> clients;
    std::vector<double> required;
    double acc = 0.0;
    for (int k : order) {
      clients.push_back(k);
      required.push_back(b_min[static_cast<std::size_t>(k)]);
      acc += b_min[static_cast<std::size_t>(k)];
      if (acc > b_max) break;
    }
    throw InfeasibleAllocation(std::move(clients), std::move(required), b_max);
  }

  // Fallback step sizes from the dual curvature at beta = 0 (used when the
  // exact mu step is disabled); the default path rescales the beta steps
  // from the current iterate instead.
  double s0 = 0.0;
  for (std::size_t k = 0; k < count; ++k) s0 += std::sqrt(d_coef[k] * a[k]);
  const double mu_hat = (s0 / b_max) * (s0 / b_max);
  double step_mu = scfg.theta_mu * 2.0 * mu_hat / b_max;
  std::vector<double> step_beta(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double b_hat = std::sqrt(d_coef[k] * a[k] / mu_hat);
    step_beta[k] = scfg.theta_beta * 2.0 * mu_hat * b_hat * b_hat * b_hat /
                   (a[k] * a[k]);
  }

  const double feas_tol_b = 1e-7 * b_max;
  std::vector<double> b(count);
  std::vector<double> g_beta(count);
  double beta_scale = scfg.theta_beta;

  for (int attempt = 0; attempt < 10; ++attempt) {
    double mu = std::max(scfg.mu_init > 0.0 ? scfg.mu_init : mu_hat,
                         scfg.mu_floor);
    std::vector<double> beta(count, 0.0);

    for (int it = 0; it < scfg.max_dual_iters; ++it) {
      if (scfg.mu_exact_step) {
        double root_sum = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
          root_sum += std::sqrt((d_coef[k] + beta[k]) * a[k]);
        }
        mu = std::max((root_sum / b_max) * (root_sum / b_max), scfg.mu_floor);
      }
      double sum_b = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        b[k] = std::sqrt((d_coef[k] + beta[k]) * a[k] / mu);
        sum_b += b[k];
      }
      const double g_mu = sum_b - b_max;
      bool ok = std::abs(g_mu) <= feas_tol_b &&
                std::abs(mu * g_mu) <= scfg.dual_tol;
      for (std::size_t k = 0; k < count; ++k) {
        g_beta[k] = fixed_lat[k] + a[k] / b[k] - specs[k].l_max;
        ok = ok && g_beta[k] <= 1e-9 + 1e-7 * specs[k].l_max &&
             std::abs(beta[k] * g_beta[k]) <= scfg.dual_tol;
      }
      if (ok) {
        // Hard feasibility repair: honor the latency floors exactly, then
        // shrink the remaining headroom proportionally if the sum overshoots.
        double floor_sum = 0.0;
        double sum = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
          b[k] = std::max(b[k], b_min[k]);
          floor_sum += b_min[k];
          sum += b[k];
        }
        if (sum > b_max) {
          const double scale = (b_max - floor_sum) / (sum - floor_sum);
          for (std::size_t k = 0; k < count; ++k) {
            b[k] = b_min[k] + (b[k] - b_min[k]) * scale;
          }
        }
        DualState duals;
        duals.mu = mu;
        duals.beta = std::move(beta);
        return {b, duals};
      }

      if (!scfg.mu_exact_step) {
        mu = std::max(scfg.mu_floor, mu + step_mu * g_mu);
      }
      for (std::size_t k = 0; k < count; ++k) {
        double step = step_beta[k];
        if (scfg.mu_exact_step) {
          // Inverse of the dual curvature at the current iterate,
          // |d g_beta_k / d beta_k| = a^2 (1 - share) / (2 mu B^3).
          const double share = b[k] / sum_b;
          step = beta_scale * 2.0 * mu * b[k] * b[k] * b[k] /
                 (a[k] * a[k] * std::max(1.0 - share, 0.05));
        }
        beta[k] = std::max(0.0, beta[k] + step * g_beta[k]);
      }
    }

    step_mu *= 0.5;
    beta_scale *= 0.5;
    for (auto& sb : step_beta) sb *= 0.5;
  }

  throw SolverFailure("bandwidth dual ascent did not reach tolerance");
}

namespace detail {

inline double total_objective(const DeviceProfile& p,
                              const std::vector<ClientSpec>& specs,
                              const std::vector<Configuration>& configs) {
  double q = 0.0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    q += objective_term(p, specs[k], configs[k]);
  }
  return q;
}

inline bool within_latency_bounds(const DeviceProfile& p,
                                  const std::vector<ClientSpec>& specs,
                                  const std::vector<Configuration>& configs) {
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const double lat = latency_per_frame(p, configs[k]).total;
    if (lat > specs[k].l_max * (1.0 + 1e-9) + 1e-12) return false;
  }
  return true;
}

}  // namespace detail

// Full block-coordinate descent: cycle frequency, size, and bandwidth updates
// until the relative change of Q drops below tau, then round the relaxed
// sizes to the discrete catalog and re-allocate bandwidth at the rounded
// sizes so the returned point meets every constraint.
inline Allocation solve(const DeviceProfile& p,
                        const std::vector<ClientSpec>& specs,
                        const SolverConfig& scfg, double b_max) {
  if (specs.empty()) throw std::invalid_argument("solve: no clients");
  p.validate();
  for (const auto& s : specs) s.validate();
  if (!(b_max > 0.0)) throw std::invalid_argument("solve: b_max must be > 0");

  const std::size_t count = specs.size();
  std::vector<Configuration> cfgs(count);
  for (auto& c : cfgs) {
    c.f = p.f_min;
    c.s = p.s_min();
    c.b = b_max / static_cast<double>(count);
  }

  Allocation out;
  double q_prev = std::numeric_limits<double>::quiet_NaN();

  for (int outer = 1; outer <= scfg.max_outer_iters; ++outer) {
    out.outer_iters = outer;
    for (std::size_t k = 0; k < count; ++k) {
      cfgs[k].f = update_frequency(p, specs[k], cfgs[k], scfg);
    }
    for (std::size_t k = 0; k < count; ++k) {
      cfgs[k].s = update_model_size(p, specs[k], cfgs[k], scfg);
    }

    auto [b_new, duals] = allocate_bandwidth(p, specs, cfgs, scfg, b_max);
    std::vector<Configuration> cand = cfgs;
    for (std::size_t k = 0; k < count; ++k) cand[k].b = b_new[k];

    // The dual stage solves its subproblem to tolerance, not exactly; keep
    // the previous (still feasible) split if it happens to score better.
    const double q_new = detail::total_objective(p, specs, cand);
    const double q_old = detail::total_objective(p, specs, cfgs);
    const bool keep_old =
        detail::within_latency_bounds(p, specs, cfgs) && q_old < q_new;
    if (!keep_old) {
      cfgs = std::move(cand);
      out.duals = std::move(duals);
    } else if (out.duals.beta.empty()) {
      out.duals = std::move(duals);
    }

    const double q = detail::total_objective(p, specs, cfgs);
    out.trace.push_back(q);
    if (outer >= 2) {
      const double denom = std::max(std::abs(q), 1e-12);
      if (std::abs(q - q_prev) / denom <= scfg.tau) {
        out.converged = true;
        break;
      }
    }
    q_prev = q;
  }

  out.q_relaxed = out.trace.back();

  // Round to the discrete catalog (ties toward the smaller size), backing off
  // size steps for clients whose rounded-up latency no bandwidth can cover.
  std::vector<std::size_t> idx(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& sizes = p.model_sizes;
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const double dist = std::abs(sizes[i] - cfgs[k].s);
      if (dist < best_dist) {  // strict: first (smaller) size wins ties
        best_dist = dist;
        best = i;
      }
    }
    idx[k] = best;
  }

  for (;;) {
    for (std::size_t k = 0; k < count; ++k) cfgs[k].s = p.model_sizes[idx[k]];
    try {
      auto [b_new, duals] = allocate_bandwidth(p, specs, cfgs, scfg, b_max);
      for (std::size_t k = 0; k < count; ++k) cfgs[k].b = b_new[k];
      out.duals = duals;
      break;
    } catch (const InfeasibleAllocation& e) {
      bool adjusted = false;
      for (int k : e.clients()) {
        if (idx[static_cast<std::size_t>(k)] > 0) {
          --idx[static_cast<std::size_t>(k)];
          adjusted = true;
        }
      }
      if (!adjusted) throw;
    }
  }

  out.configs = cfgs;
  out.q_value = detail::total_objective(p, specs, cfgs);
  out.rounding_gap = std::abs(out.q_value - out.q_relaxed);
  return out;
}

}  // namespace marsim
