#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "marsim/profile.hpp"
#include "marsim/scenario.hpp"

namespace marsim {

using json = nlohmann::json;

inline json profile_to_json(const DeviceProfile& p) {
  json j;
  j["e_gt_coeffs"] = p.e_gt_coeffs;
  j["e_prv_coeffs"] = p.e_prv_coeffs;
  j["p_cv_coeffs"] = p.p_cv_coeffs;
  j["l_cv_coeffs"] = p.l_cv_coeffs;
  j["r_max_slope"] = p.r_max_slope;
  j["r_star_coeffs"] = p.r_star_coeffs;
  j["p_tr_coeffs"] = p.p_tr_coeffs;
  j["l_inf_coeffs"] = p.l_inf_coeffs;
  j["p_bs_coeffs"] = p.p_bs_coeffs;
  j["p_pro"] = p.p_pro;
  j["t_pro"] = p.t_pro;
  j["p_tail"] = p.p_tail;
  j["t_tail"] = p.t_tail;
  j["f_min"] = p.f_min;
  j["f_max"] = p.f_max;
  j["f_governor_default"] = p.f_governor_default;
  j["model_sizes"] = p.model_sizes;
  j["sigma_bits_per_pixel"] = p.sigma;
  j["accuracy_a"] = p.accuracy_a;
  j["accuracy_b"] = p.accuracy_b;
  j["l_inf_norm"] = p.l_inf_norm;
  j["tracking_energy_table"] = p.tracking_energy_table;
  j["tracking_latency_table"] = p.tracking_latency_table;
  j["tracking_tables_note"] =
      "synthetic defaults, not measured; tracking stays far cheaper than "
      "detection across the frequency range";
  j["psnr_cap_db"] = p.psnr_cap_db;
  // Polynomial coefficient arrays are constant-term first.
  j["coefficient_order"] = "ascending";
  return j;
}

inline DeviceProfile profile_from_json(const json& j) {
  DeviceProfile p = default_profile();
  auto load = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  load("e_gt_coeffs", p.e_gt_coeffs);
  load("e_prv_coeffs", p.e_prv_coeffs);
  load("p_cv_coeffs", p.p_cv_coeffs);
  load("l_cv_coeffs", p.l_cv_coeffs);
  load("r_max_slope", p.r_max_slope);
  load("r_star_coeffs", p.r_star_coeffs);
  load("p_tr_coeffs", p.p_tr_coeffs);
  load("l_inf_coeffs", p.l_inf_coeffs);
  load("p_bs_coeffs", p.p_bs_coeffs);
  load("p_pro", p.p_pro);
  load("t_pro", p.t_pro);
  load("p_tail", p.p_tail);
  load("t_tail", p.t_tail);
  load("f_min", p.f_min);
  load("f_max", p.f_max);
  load("f_governor_default", p.f_governor_default);
  load("model_sizes", p.model_sizes);
  load("sigma_bits_per_pixel", p.sigma);
  load("accuracy_a", p.accuracy_a);
  load("accuracy_b", p.accuracy_b);
  load("l_inf_norm", p.l_inf_norm);
  load("tracking_energy_table", p.tracking_energy_table);
  load("tracking_latency_table", p.tracking_latency_table);
  load("psnr_cap_db", p.psnr_cap_db);
  p.validate();
  return p;
}

inline SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  auto load = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  load("gamma", c.gamma);
  load("eta", c.eta);
  load("theta_mu", c.theta_mu);
  load("theta_beta", c.theta_beta);
  load("tau", c.tau);
  load("max_outer_iters", c.max_outer_iters);
  load("max_inner_iters", c.max_inner_iters);
  load("max_dual_iters", c.max_dual_iters);
  load("inner_tol", c.inner_tol);
  load("mu_init", c.mu_init);
  load("mu_floor", c.mu_floor);
  load("dual_tol", c.dual_tol);
  load("use_fd_gradients", c.use_fd_gradients);
  return c;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario sc;
  const double default_l1 = j.value("default_lambda1", 0.3);
  const double default_l2 = j.value("default_lambda2", 1.8);

  if (!j.contains("clients") || !j.at("clients").is_array()) {
    throw ValidationError({"scenario needs a 'clients' array"});
  }
  for (const auto& cj : j.at("clients")) {
    ClientSpec spec;
    spec.fps = cj.at("fps").get<int>();
    spec.lambda1 = cj.value("lambda1", default_l1);
    spec.lambda2 = cj.value("lambda2", default_l2);
    spec.l_max = cj.value("l_max", 0.0);  // 0 = fill from the default rule
    sc.clients.push_back(spec);
  }

  if (j.contains("b_max")) {
    const auto& b = j.at("b_max");
    if (b.is_array()) {
      sc.b_max_sweep = b.get<std::vector<double>>();
    } else {
      sc.b_max_sweep = {b.get<double>()};
    }
  }

  sc.preference_sweep.clear();
  if (j.contains("preference_pairs")) {
    for (const auto& pair : j.at("preference_pairs")) {
      sc.preference_sweep.emplace_back(pair.at(0).get<double>(),
                                       pair.at(1).get<double>());
    }
  }
  if (j.contains("preference_ratios")) {
    // Ratio r maps to (lambda1, r * lambda1) with lambda1 held at its default.
    for (const auto& r : j.at("preference_ratios")) {
      const double ratio = r.get<double>();
      sc.preference_sweep.emplace_back(default_l1, default_l1 * ratio);
    }
  }

  if (j.contains("offload_ratios")) {
    sc.offload_sweep = j.at("offload_ratios").get<std::vector<double>>();
  }

  if (j.contains("algorithm")) {
    sc.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  }

  if (j.contains("trace")) {
    const auto& tj = j.at("trace");
    const std::string kind = tj.value("type", "synthetic");
    if (kind == "synthetic") {
      sc.trace.kind = TraceSource::Kind::kSynthetic;
    } else if (kind == "psnr_file") {
      sc.trace.kind = TraceSource::Kind::kPsnrFile;
    } else if (kind == "pgm_dir") {
      sc.trace.kind = TraceSource::Kind::kPgmDir;
    } else {
      throw ValidationError({"unknown trace type: " + kind});
    }
    sc.trace.seed = tj.value("seed", static_cast<std::uint64_t>(42));
    sc.trace.length = tj.value("length", 600);
    sc.trace.start_db = tj.value("start_db", 28.0);
    sc.trace.drift_db = tj.value("drift_db", -0.2);
    sc.trace.noise_db = tj.value("noise_db", 0.05);
    sc.trace.path = tj.value("path", std::string{});
  }

  sc.frugal_ncc_threshold = j.value("frugal_ncc_threshold", 0.5);
  sc.frugal_ref_std = j.value("frugal_ref_std", 40.0);
  if (j.contains("solver")) {
    sc.solver = solver_config_from_json(j.at("solver"));
  }
  sc.validate();
  return sc;
}

inline json report_to_json(const Report& report) {
  json j;
  j["kind"] = report.kind == Report::Kind::kLeaf ? "leaf" : "aio";
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json rj;
    rj["algorithm"] = r.algorithm;
    rj["b_max_mbps"] = r.b_max;
    rj["lambda1"] = r.lambda1;
    rj["lambda2"] = r.lambda2;
    rj["theta1"] = r.theta1;
    rj["theta2"] = r.theta2;
    rj["client"] = r.client;
    rj["fps"] = r.fps;
    rj["f_ghz"] = r.f_ghz;
    rj["s_px"] = r.s_px;
    rj["b_mbps"] = r.b_mbps;
    rj["energy_j"] = r.energy_j;
    rj["latency_s"] = r.latency_s;
    rj["accuracy"] = r.accuracy;
    rj["q_client"] = r.q_term;
    rj["frames"] = r.frames;
    rj["detects"] = r.detects;
    rj["energy_total_j"] = r.energy_total_j;
    rj["offload_fraction"] = r.offload_fraction;
    rj["data_mb"] = r.data_mb;
    rj["mean_pred_iou"] = r.mean_pred_iou;
    rj["feasible"] = r.feasible;
    rj["note"] = r.note;
    j["rows"].push_back(std::move(rj));
  }
  j["aggregates"] = json::array();
  for (const auto& agg : aggregate_rows(report)) {
    json aj;
    aj["algorithm"] = agg.algorithm;
    aj["b_max_mbps"] = agg.b_max;
    aj["lambda1"] = agg.lambda1;
    aj["lambda2"] = agg.lambda2;
    aj["theta1"] = agg.theta1;
    aj["theta2"] = agg.theta2;
    aj["clients"] = agg.clients;
    aj["q_total"] = agg.q_total;
    aj["mean_energy_j"] = agg.mean_energy_j;
    aj["mean_latency_s"] = agg.mean_latency_s;
    aj["mean_accuracy"] = agg.mean_accuracy;
    aj["mean_offload_fraction"] = agg.mean_offload_fraction;
    aj["mean_pred_iou"] = agg.mean_pred_iou;
    aj["sum_b_mbps"] = agg.sum_b_mbps;
    aj["feasible"] = agg.feasible;
    j["aggregates"].push_back(std::move(aj));
  }
  j["solves"] = json::array();
  for (const auto& s : report.solves) {
    json sj;
    sj["algorithm"] = s.algorithm;
    sj["b_max_mbps"] = s.b_max;
    sj["lambda1"] = s.lambda1;
    sj["lambda2"] = s.lambda2;
    sj["converged"] = s.converged;
    sj["outer_iters"] = s.outer_iters;
    sj["q_value"] = s.q_value;
    sj["q_relaxed"] = s.q_relaxed;
    sj["rounding_gap"] = s.rounding_gap;
    sj["q_trace"] = s.trace;
    j["solves"].push_back(std::move(sj));
  }
  return j;
}

inline json allocation_to_json(const Allocation& alloc) {
  json j;
  j["converged"] = alloc.converged;
  j["outer_iters"] = alloc.outer_iters;
  j["q_value"] = alloc.q_value;
  j["q_relaxed"] = alloc.q_relaxed;
  j["rounding_gap"] = alloc.rounding_gap;
  j["q_trace"] = alloc.trace;
  j["mu"] = alloc.duals.mu;
  j["beta"] = alloc.duals.beta;
  j["configs"] = json::array();
  for (const auto& c : alloc.configs) {
    j["configs"].push_back({{"f_ghz", c.f}, {"s_px", c.s}, {"b_mbps", c.b}});
  }
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

inline void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("short write: " + path);
}

inline DeviceProfile load_profile_file(const std::string& path) {
  return profile_from_json(load_json_file(path));
}

inline Scenario load_scenario_file(const std::string& path) {
  return scenario_from_json(load_json_file(path));
}

}  // namespace marsim
