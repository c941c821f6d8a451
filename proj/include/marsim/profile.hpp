#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "marsim/errors.hpp"
#include "marsim/poly.hpp"

namespace marsim {

// Frequency-indexed lookup (GHz -> value), linearly interpolated and clamped
// at the ends. Entries must be sorted by frequency.
using FreqTable = std::vector<std::pair<double, double>>;

inline double lookup_freq_table(const FreqTable& table, double f) {
  if (table.empty()) {
    throw std::invalid_argument("lookup_freq_table: empty table");
  }
  if (f <= table.front().first) return table.front().second;
  if (f >= table.back().first) return table.back().second;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (f <= table[i].first) {
      const auto& [f0, v0] = table[i - 1];
      const auto& [f1, v1] = table[i];
      const double t = (f - f0) / (f1 - f0);
      return v0 + t * (v1 - v0);
    }
  }
  return table.back().second;
}

// Device-side regression models and radio constants. Polynomials take the
// units noted per field; coefficients are stored constant-term first.
struct DeviceProfile {
  Poly e_gt_coeffs;    // J vs GHz, per generated frame
  Poly e_prv_coeffs;   // J vs GHz, per previewed frame
  Poly p_cv_coeffs;    // W vs GHz
  Poly l_cv_coeffs;    // s vs GHz
  double r_max_slope;  // Mbps throughput per Mbps allocated
  Poly r_star_coeffs;  // dimensionless TCP factor vs GHz
  Poly p_tr_coeffs;    // W vs achieved rate in Mbps
  Poly l_inf_coeffs;   // s vs normalized model area (s_px / l_inf_norm)^2
  Poly p_bs_coeffs;    // W vs GHz

  double p_pro;   // W, radio promotion phase
  double t_pro;   // s
  double p_tail;  // W, radio tail phase
  double t_tail;  // s

  double f_min;  // GHz
  double f_max;  // GHz
  double f_governor_default;  // GHz, stock-governor operating point

  std::vector<double> model_sizes;  // available detector side lengths, px
  double sigma;                     // bits per transmitted pixel
  double accuracy_a;                // A(s) = 1 - a*exp(-b*s)
  double accuracy_b;
  double l_inf_norm;  // side-length divisor for the inference-latency argument

  // Local-tracking cost tables. These are synthetic placeholders shaped to
  // keep tracking far cheaper than detection; they are not measured values.
  FreqTable tracking_energy_table;   // GHz -> J per tracked frame
  FreqTable tracking_latency_table;  // GHz -> s per tracked frame

  double psnr_cap_db;  // cap applied to PSNR where MSE -> 0

  double s_min() const { return model_sizes.front(); }
  double s_max() const { return model_sizes.back(); }

  void validate() const {
    std::vector<std::string> issues;
    auto need = [&](bool ok, const std::string& what) {
      if (!ok) issues.push_back(what);
    };

    need(!e_gt_coeffs.empty(), "e_gt_coeffs empty");
    need(!e_prv_coeffs.empty(), "e_prv_coeffs empty");
    need(!p_cv_coeffs.empty(), "p_cv_coeffs empty");
    need(!l_cv_coeffs.empty(), "l_cv_coeffs empty");
    need(!r_star_coeffs.empty(), "r_star_coeffs empty");
    need(!p_tr_coeffs.empty(), "p_tr_coeffs empty");
    need(!l_inf_coeffs.empty(), "l_inf_coeffs empty");
    need(!p_bs_coeffs.empty(), "p_bs_coeffs empty");

    need(f_min > 0.0, "f_min must be > 0");
    need(f_min < f_max, "f_min must be < f_max");
    need(f_governor_default >= f_min && f_governor_default <= f_max,
         "f_governor_default outside [f_min, f_max]");
    need(r_max_slope > 0.0, "r_max_slope must be > 0");
    need(sigma > 0.0, "sigma must be > 0");
    need(t_pro >= 0.0 && t_tail >= 0.0, "phase durations must be >= 0");
    need(p_pro >= 0.0 && p_tail >= 0.0, "phase powers must be >= 0");
    need(l_inf_norm > 0.0, "l_inf_norm must be > 0");
    need(psnr_cap_db > 0.0, "psnr_cap_db must be > 0");

    need(!model_sizes.empty(), "model_sizes empty");
    for (std::size_t i = 0; i < model_sizes.size(); ++i) {
      if (model_sizes[i] <= 0.0) {
        issues.push_back("model_sizes must all be > 0");
        break;
      }
      if (i > 0 && model_sizes[i] <= model_sizes[i - 1]) {
        issues.push_back("model_sizes must be strictly increasing");
        break;
      }
    }

    auto check_table = [&](const FreqTable& t, const std::string& name) {
      need(!t.empty(), name + " empty");
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].second <= 0.0) {
          issues.push_back(name + " entries must be > 0");
          break;
        }
        if (i > 0 && t[i].first <= t[i - 1].first) {
          issues.push_back(name + " frequencies must be strictly increasing");
          break;
        }
      }
    };
    check_table(tracking_energy_table, "tracking_energy_table");
    check_table(tracking_latency_table, "tracking_latency_table");

    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
};

// One MAR client's sampling rate, preference weights, and latency bound.
struct ClientSpec {
  int fps = 15;          // camera frames sampled per second
  double lambda1 = 0.3;  // J per second of service latency
  double lambda2 = 1.8;  // J per unit of detection accuracy
  double l_max = 0.0;    // s, maximum tolerable per-frame service latency

  void validate() const {
    std::vector<std::string> issues;
    if (fps < 1) issues.push_back("fps must be >= 1");
    if (lambda1 < 0.0) issues.push_back("lambda1 must be >= 0");
    if (lambda2 < 0.0) issues.push_back("lambda2 must be >= 0");
    if (l_max <= 0.0) issues.push_back("l_max must be > 0");
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
};

// One client's operating point: CPU frequency, model side length (continuous
// while relaxed, one of model_sizes once rounded), allocated bandwidth.
struct Configuration {
  double f = 1.0;   // GHz
  double s = 320.0; // px
  double b = 10.0;  // Mbps
};

// Stock profile carrying the fitted device models and radio phase constants.
inline DeviceProfile default_profile() {
  DeviceProfile p;
  p.e_gt_coeffs = {0.107, -0.1028, 0.06055, -0.01071};
  p.e_prv_coeffs = {0.04816, 0.01094};
  p.p_cv_coeffs = {0.04295, 0.2175, 0.01, 0.1124};
  p.l_cv_coeffs = {0.996, -1.467, 0.8, -0.145};
  p.r_max_slope = 0.677;
  p.r_star_coeffs = {0.4489, 0.7916, -0.4264, 0.07651};
  p.p_tr_coeffs = {0.7368, 0.01821};
  p.l_inf_coeffs = {0.08892, 0.07816};
  p.p_bs_coeffs = {0.5918, 0.07873};
  p.p_pro = 1.97;
  p.t_pro = 0.034;
  p.p_tail = 1.61;
  p.t_tail = 0.21;
  p.f_min = 0.3;
  p.f_max = 2.649;
  p.f_governor_default = 1.49;
  p.model_sizes = {128.0, 224.0, 320.0, 416.0, 512.0, 608.0};
  p.sigma = 24.0;  // 8-bit RGB
  p.accuracy_a = 1.578;
  p.accuracy_b = 6.5e-3;
  p.l_inf_norm = 100.0;
  p.tracking_energy_table = {
      {0.3, 0.150}, {0.6, 0.180}, {0.9, 0.210},  {1.2, 0.240},
      {1.5, 0.270}, {1.8, 0.300}, {2.1, 0.330},  {2.4, 0.360},
      {2.649, 0.385}};
  p.tracking_latency_table = {
      {0.3, 0.1447}, {0.6, 0.0813}, {0.9, 0.0602},  {1.2, 0.0497},
      {1.5, 0.0433}, {1.8, 0.0391}, {2.1, 0.0361},  {2.4, 0.0338},
      {2.649, 0.0323}};
  p.psnr_cap_db = 100.0;
  return p;
}

}  // namespace marsim
