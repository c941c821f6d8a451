#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "marsim/profile.hpp"

namespace marsim {

// Per-frame cost split. total and latency are exact sums of their parts.
struct EnergyBreakdown {
  double e_img = 0.0;  // image generation + preview, J
  double e_cv = 0.0;   // YUV->RGB conversion, J
  double e_com = 0.0;  // radio (transmit + idle + promotion + tail), J
  double e_bs = 0.0;   // base platform draw over the service window, J
  double total = 0.0;  // J

  double l_cv = 0.0;     // s
  double l_tr = 0.0;     // s
  double l_inf = 0.0;    // s
  double latency = 0.0;  // s
};

struct LatencyBreakdown {
  double l_cv = 0.0;
  double l_tr = 0.0;
  double l_inf = 0.0;
  double total = 0.0;
};

// Gradient of a per-client quantity w.r.t. the configuration triple.
struct ConfigGradient {
  double df = 0.0;  // per GHz
  double ds = 0.0;  // per pixel of side length
  double db = 0.0;  // per Mbps
};

namespace detail {

inline void check_frequency(const DeviceProfile& p, double f) {
  if (!(f >= p.f_min && f <= p.f_max)) {
    throw std::domain_error("CPU frequency " + std::to_string(f) +
                            " GHz outside fitted range [" +
                            std::to_string(p.f_min) + ", " +
                            std::to_string(p.f_max) + "]");
  }
}

inline void check_config(const DeviceProfile& p, const Configuration& cfg) {
  check_frequency(p, cfg.f);
  if (!(cfg.s > 0.0)) throw std::domain_error("model size must be > 0");
  if (!(cfg.b > 0.0)) throw std::domain_error("bandwidth must be > 0");
}

// The single bits-vs-Mbps conversion site: frame payload in megabits, so
// that dividing by a rate in Mbps yields seconds.
inline double payload_megabits(const DeviceProfile& p, double side_px) {
  return p.sigma * side_px * side_px / 1e6;
}

}  // namespace detail

// Achieved wireless rate in Mbps: network throughput of the allocated
// bandwidth scaled by the CPU-bound TCP factor.
inline double data_rate(const DeviceProfile& p, double f, double b) {
  detail::check_frequency(p, f);
  if (!(b > 0.0)) throw std::domain_error("bandwidth must be > 0");
  const double rate = p.r_max_slope * b * eval_poly(p.r_star_coeffs, f);
  if (!(rate > 0.0)) {
    throw std::domain_error("nonpositive data rate at f=" + std::to_string(f));
  }
  return rate;
}

inline LatencyBreakdown latency_per_frame(const DeviceProfile& p,
                                          const Configuration& cfg) {
  detail::check_config(p, cfg);
  LatencyBreakdown lat;
  lat.l_cv = eval_poly(p.l_cv_coeffs, cfg.f);
  lat.l_tr = detail::payload_megabits(p, cfg.s) / data_rate(p, cfg.f, cfg.b);
  const double norm_side = cfg.s / p.l_inf_norm;
  lat.l_inf = eval_poly(p.l_inf_coeffs, norm_side * norm_side);
  lat.total = lat.l_cv + lat.l_tr + lat.l_inf;
  return lat;
}

inline EnergyBreakdown energy_per_frame(const DeviceProfile& p,
                                        const ClientSpec& spec,
                                        const Configuration& cfg) {
  const LatencyBreakdown lat = latency_per_frame(p, cfg);

  EnergyBreakdown e;
  e.l_cv = lat.l_cv;
  e.l_tr = lat.l_tr;
  e.l_inf = lat.l_inf;
  e.latency = lat.total;

  const double per_frame_gen =
      eval_poly(p.e_gt_coeffs, cfg.f) + eval_poly(p.e_prv_coeffs, cfg.f);
  e.e_img = per_frame_gen * static_cast<double>(spec.fps) * lat.total;

  e.e_cv = eval_poly(p.p_cv_coeffs, cfg.f) * lat.l_cv;

  const double rate = data_rate(p, cfg.f, cfg.b);
  const double p_tr = eval_poly(p.p_tr_coeffs, rate);
  const double p_bs = eval_poly(p.p_bs_coeffs, cfg.f);

  // The radio sits idle (at base power) while waiting for inference results
  // that outlast the tail phase; otherwise the tail covers the wait.
  const bool long_inference = lat.l_inf > p.t_tail;
  const double idle = long_inference ? p_bs * (lat.l_inf - p.t_tail) : 0.0;
  e.e_com = p_tr * lat.l_tr + idle + p.p_pro * p.t_pro + p.p_tail * p.t_tail;

  e.e_bs = long_inference ? p_bs * (lat.total - lat.l_inf + p.t_tail)
                          : p_bs * lat.total;

  e.total = e.e_img + e.e_cv + e.e_com + e.e_bs;
  return e;
}

// Detection accuracy of a model with side length s, in (0, 1), increasing.
inline double accuracy(const DeviceProfile& p, double s) {
  if (!(s > 0.0)) throw std::domain_error("model size must be > 0");
  return 1.0 - p.accuracy_a * std::exp(-p.accuracy_b * s);
}

// One client's contribution to the weighted objective: E + l1*L - l2*A.
inline double objective_term(const DeviceProfile& p, const ClientSpec& spec,
                             const Configuration& cfg) {
  const EnergyBreakdown e = energy_per_frame(p, spec, cfg);
  return e.total + spec.lambda1 * e.latency - spec.lambda2 * accuracy(p, cfg.s);
}

// Analytic gradient of the per-frame service latency.
inline ConfigGradient latency_gradient(const DeviceProfile& p,
                                       const Configuration& cfg) {
  detail::check_config(p, cfg);
  const double rstar = eval_poly(p.r_star_coeffs, cfg.f);
  const double rate = p.r_max_slope * cfg.b * rstar;
  const double l_tr = detail::payload_megabits(p, cfg.s) / rate;
  const double drstar = eval_poly_deriv(p.r_star_coeffs, cfg.f);

  ConfigGradient g;
  g.df = eval_poly_deriv(p.l_cv_coeffs, cfg.f) - l_tr * drstar / rstar;
  const double norm2 = p.l_inf_norm * p.l_inf_norm;
  const double x_inf = cfg.s * cfg.s / norm2;
  g.ds = 2.0 * l_tr / cfg.s +
         eval_poly_deriv(p.l_inf_coeffs, x_inf) * 2.0 * cfg.s / norm2;
  g.db = -l_tr / cfg.b;
  return g;
}

// Analytic gradient of the per-client objective term. Matches the branch
// layout of energy_per_frame; the idle/base split leaves the sum smooth.
inline ConfigGradient objective_gradient(const DeviceProfile& p,
                                         const ClientSpec& spec,
                                         const Configuration& cfg) {
  detail::check_config(p, cfg);
  const double fps = static_cast<double>(spec.fps);

  const double rstar = eval_poly(p.r_star_coeffs, cfg.f);
  const double drstar = eval_poly_deriv(p.r_star_coeffs, cfg.f);
  const double rate = p.r_max_slope * cfg.b * rstar;
  const double drate_df = p.r_max_slope * cfg.b * drstar;
  const double drate_db = p.r_max_slope * rstar;

  const double l_cv = eval_poly(p.l_cv_coeffs, cfg.f);
  const double dl_cv = eval_poly_deriv(p.l_cv_coeffs, cfg.f);
  const double l_tr = detail::payload_megabits(p, cfg.s) / rate;
  const double dl_tr_df = -l_tr * drate_df / rate;
  const double dl_tr_ds = 2.0 * l_tr / cfg.s;
  const double dl_tr_db = -l_tr / cfg.b;

  const double norm2 = p.l_inf_norm * p.l_inf_norm;
  const double x_inf = cfg.s * cfg.s / norm2;
  const double l_inf = eval_poly(p.l_inf_coeffs, x_inf);
  const double dl_inf_ds =
      eval_poly_deriv(p.l_inf_coeffs, x_inf) * 2.0 * cfg.s / norm2;

  const double lat = l_cv + l_tr + l_inf;
  const double dlat_df = dl_cv + dl_tr_df;
  const double dlat_ds = dl_tr_ds + dl_inf_ds;
  const double dlat_db = dl_tr_db;

  const double gen = eval_poly(p.e_gt_coeffs, cfg.f) +
                     eval_poly(p.e_prv_coeffs, cfg.f);
  const double dgen = eval_poly_deriv(p.e_gt_coeffs, cfg.f) +
                      eval_poly_deriv(p.e_prv_coeffs, cfg.f);

  const double p_cv = eval_poly(p.p_cv_coeffs, cfg.f);
  const double dp_cv = eval_poly_deriv(p.p_cv_coeffs, cfg.f);
  const double p_tr = eval_poly(p.p_tr_coeffs, rate);
  const double dp_tr_drate = eval_poly_deriv(p.p_tr_coeffs, rate);
  const double p_bs = eval_poly(p.p_bs_coeffs, cfg.f);
  const double dp_bs = eval_poly_deriv(p.p_bs_coeffs, cfg.f);

  ConfigGradient g;

  // E_img = gen * fps * L
  g.df = fps * (dgen * lat + gen * dlat_df);
  g.ds = fps * gen * dlat_ds;
  g.db = fps * gen * dlat_db;

  // E_cv = P_cv * L_cv
  g.df += dp_cv * l_cv + p_cv * dl_cv;

  // Transmit part of E_com = P_tr(R) * L_tr
  g.df += dp_tr_drate * drate_df * l_tr + p_tr * dl_tr_df;
  g.ds += p_tr * dl_tr_ds;
  g.db += dp_tr_drate * drate_db * l_tr + p_tr * dl_tr_db;

  if (l_inf > p.t_tail) {
    // Idle part of E_com = P_bs * (L_inf - t_tail)
    g.df += dp_bs * (l_inf - p.t_tail);
    g.ds += p_bs * dl_inf_ds;
    // E_bs = P_bs * (L - L_inf + t_tail)
    const double window = lat - l_inf + p.t_tail;
    g.df += dp_bs * window + p_bs * (dlat_df);
    g.ds += p_bs * (dlat_ds - dl_inf_ds);
    g.db += p_bs * dlat_db;
  } else {
    // E_bs = P_bs * L
    g.df += dp_bs * lat + p_bs * dlat_df;
    g.ds += p_bs * dlat_ds;
    g.db += p_bs * dlat_db;
  }

  // lambda1 * L
  g.df += spec.lambda1 * dlat_df;
  g.ds += spec.lambda1 * dlat_ds;
  g.db += spec.lambda1 * dlat_db;

  // -lambda2 * A(s)
  g.ds -= spec.lambda2 * p.accuracy_a * p.accuracy_b *
          std::exp(-p.accuracy_b * cfg.s);

  return g;
}

// Central-difference gradient of the objective term; configuration-selected
// fallback for the analytic path and a convenient cross-check.
inline ConfigGradient objective_gradient_fd(const DeviceProfile& p,
                                            const ClientSpec& spec,
                                            const Configuration& cfg,
                                            double rel_h = 1e-6) {
  // Stencil points are clamped into the valid domain (one-sided at bounds).
  auto diff = [&](double Configuration::*field, double scale, double lo_bound,
                  double hi_bound) {
    const double h = rel_h * scale;
    Configuration hi = cfg;
    Configuration lo = cfg;
    hi.*field = std::min(cfg.*field + h, hi_bound);
    lo.*field = std::max(cfg.*field - h, lo_bound);
    const double spread = hi.*field - lo.*field;
    return (objective_term(p, spec, hi) - objective_term(p, spec, lo)) / spread;
  };
  ConfigGradient g;
  const double inf = std::numeric_limits<double>::infinity();
  g.df = diff(&Configuration::f, p.f_max - p.f_min, p.f_min, p.f_max);
  g.ds = diff(&Configuration::s, p.s_max() - p.s_min() + 1.0, 1e-9, inf);
  g.db = diff(&Configuration::b, std::max(cfg.b, 1.0), cfg.b * 0.5, inf);
  return g;
}

}  // namespace marsim
