#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "marsim/aio.hpp"
#include "marsim/energy_model.hpp"
#include "marsim/errors.hpp"
#include "marsim/frame_metrics.hpp"
#include "marsim/leaf.hpp"
#include "marsim/scenario.hpp"
#include "marsim/synth.hpp"

namespace marsim {

// Fills unset latency bounds: twice the latency of the largest model at the
// stock governor frequency and an even bandwidth share. Generous on purpose;
// scenarios that want binding bounds set l_max explicitly.
inline std::vector<ClientSpec> resolve_latency_bounds(
    const DeviceProfile& p, std::vector<ClientSpec> specs, double b_max) {
  const double b_even = b_max / static_cast<double>(specs.size());
  for (auto& spec : specs) {
    if (spec.l_max <= 0.0) {
      Configuration cfg;
      cfg.f = p.f_governor_default;
      cfg.s = p.s_max();
      cfg.b = b_even;
      spec.l_max = 2.0 * latency_per_frame(p, cfg).total;
    }
  }
  return specs;
}

// The fixed-frequency, even-bandwidth baseline: each client grid-searches the
// discrete sizes for the best latency/accuracy trade, ignoring energy.
inline std::vector<Configuration> run_fact_like(
    const DeviceProfile& p, const std::vector<ClientSpec>& specs,
    double b_max) {
  std::vector<Configuration> cfgs(specs.size());
  const double b_even = b_max / static_cast<double>(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    Configuration c;
    c.f = p.f_governor_default;
    c.b = b_even;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_s = p.s_min();
    for (double s : p.model_sizes) {
      c.s = s;
      const double obj = specs[k].lambda1 * latency_per_frame(p, c).total -
                         specs[k].lambda2 * accuracy(p, s);
      if (obj < best_obj) {
        best_obj = obj;
        best_s = s;
      }
    }
    c.s = best_s;
    cfgs[k] = c;
  }
  return cfgs;
}

namespace detail {

inline ReportRow metrics_row(const DeviceProfile& p, const ClientSpec& spec,
                             const Configuration& cfg, int client) {
  ReportRow row;
  row.client = client;
  row.fps = spec.fps;
  row.lambda1 = spec.lambda1;
  row.lambda2 = spec.lambda2;
  row.f_ghz = cfg.f;
  row.s_px = cfg.s;
  row.b_mbps = cfg.b;
  const EnergyBreakdown e = energy_per_frame(p, spec, cfg);
  row.energy_j = e.total;
  row.latency_s = e.latency;
  row.accuracy = accuracy(p, cfg.s);
  row.q_term = e.total + spec.lambda1 * e.latency -
               spec.lambda2 * row.accuracy;
  row.feasible = e.latency <= spec.l_max * (1.0 + 1e-9);
  if (!row.feasible) row.note = "latency bound exceeded";
  return row;
}

inline std::vector<std::pair<double, double>> preference_points(
    const Scenario& sc) {
  if (!sc.preference_sweep.empty()) return sc.preference_sweep;
  return {{-1.0, -1.0}};  // sentinel: keep per-client lambdas
}

inline std::vector<ClientSpec> apply_preference(
    std::vector<ClientSpec> specs, const std::pair<double, double>& pref) {
  if (pref.first >= 0.0) {
    for (auto& s : specs) {
      s.lambda1 = pref.first;
      s.lambda2 = pref.second;
    }
  }
  return specs;
}

}  // namespace detail

// Solves one allocation per swept (b_max, preference) point with the
// scenario's algorithm and reports per-client per-frame metrics.
inline Report run_leaf_scenario(const DeviceProfile& p, const Scenario& sc) {
  sc.validate();
  p.validate();
  Report report;
  report.kind = Report::Kind::kLeaf;
  const std::string name = algorithm_name(sc.algorithm);

  for (double b_max : sc.b_max_sweep) {
    for (const auto& pref : detail::preference_points(sc)) {
      std::vector<ClientSpec> specs =
          detail::apply_preference(sc.clients, pref);
      specs = resolve_latency_bounds(p, std::move(specs), b_max);

      auto emit_infeasible = [&](const InfeasibleAllocation& err) {
        for (std::size_t k = 0; k < specs.size(); ++k) {
          ReportRow row;
          row.algorithm = name;
          row.b_max = b_max;
          row.client = static_cast<int>(k);
          row.fps = specs[k].fps;
          row.lambda1 = specs[k].lambda1;
          row.lambda2 = specs[k].lambda2;
          row.feasible = false;
          row.note = err.what();
          report.rows.push_back(std::move(row));
        }
      };

      try {
        std::vector<Configuration> cfgs;
        SolveRecord record;
        record.algorithm = name;
        record.b_max = b_max;
        record.lambda1 = specs.front().lambda1;
        record.lambda2 = specs.front().lambda2;

        if (sc.algorithm == Algorithm::kFactLike) {
          cfgs = run_fact_like(p, specs, b_max);
          record.converged = true;
          double q = 0.0;
          for (std::size_t k = 0; k < specs.size(); ++k) {
            q += objective_term(p, specs[k], cfgs[k]);
          }
          record.q_value = q;
          record.q_relaxed = q;
        } else {
          std::vector<ClientSpec> solve_specs = specs;
          if (sc.algorithm == Algorithm::kMine) {
            for (auto& s : solve_specs) {
              s.lambda1 = 0.0;
              s.lambda2 = 0.0;
            }
          }
          const Allocation alloc = solve(p, solve_specs, sc.solver, b_max);
          cfgs = alloc.configs;
          record.converged = alloc.converged;
          record.outer_iters = alloc.outer_iters;
          record.q_relaxed = alloc.q_relaxed;
          record.rounding_gap = alloc.rounding_gap;
          record.trace = alloc.trace;
          // Report Q under the clients' true preferences.
          double q = 0.0;
          for (std::size_t k = 0; k < specs.size(); ++k) {
            q += objective_term(p, specs[k], cfgs[k]);
          }
          record.q_value = q;
        }

        for (std::size_t k = 0; k < specs.size(); ++k) {
          ReportRow row = detail::metrics_row(p, specs[k], cfgs[k],
                                              static_cast<int>(k));
          row.algorithm = name;
          row.b_max = b_max;
          report.rows.push_back(std::move(row));
        }
        report.solves.push_back(std::move(record));
      } catch (const InfeasibleAllocation& err) {
        emit_infeasible(err);
      }
    }
  }
  return report;
}

// PSNR trace plus, when available, the frames backing it.
struct ResolvedTrace {
  std::vector<double> psnr;     // entry t: PSNR between frames t-1 and t
  std::vector<Frame> frames;    // empty unless loaded from PGM files
};

inline ResolvedTrace resolve_trace(const TraceSource& ts) {
  ResolvedTrace out;
  switch (ts.kind) {
    case TraceSource::Kind::kSynthetic:
      out.psnr = synth_trace(ts.seed, ts.length, ts.drift_db, ts.noise_db,
                             ts.start_db);
      return out;
    case TraceSource::Kind::kPsnrFile: {
      std::ifstream in(ts.path);
      if (!in) throw std::runtime_error("cannot open PSNR trace: " + ts.path);
      double v;
      while (in >> v) out.psnr.push_back(v);
      if (out.psnr.size() < 3) {
        throw std::runtime_error("PSNR trace too short: " + ts.path);
      }
      return out;
    }
    case TraceSource::Kind::kPgmDir: {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(ts.path)) {
        if (entry.path().extension() == ".pgm") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      if (files.size() < 4) {
        throw std::runtime_error("need at least 4 PGM frames in " + ts.path);
      }
      for (const auto& f : files) out.frames.push_back(load_pgm(f.string()));
      for (std::size_t i = 1; i < out.frames.size(); ++i) {
        out.psnr.push_back(psnr(out.frames[i - 1], out.frames[i]));
      }
      return out;
    }
  }
  throw std::logic_error("unreachable trace kind");
}

namespace detail {

// Per-frame simulation of one offloading policy over one trace.
struct PolicyRun {
  long frames = 0;
  long detects = 0;
  double mean_pred_iou = 0.0;
};

inline PolicyRun simulate_policy(
    const DeviceProfile& p, const Scenario& sc, Algorithm policy,
    const ClientSpec& spec, const Configuration& cfg, double e_obj,
    const OffloadPreference& pref, const SceneModel& scene,
    const ResolvedTrace& trace) {
  OrchestratorState st = make_orchestrator_state(p, spec, e_obj, cfg.f);
  const double var_ref = sc.frugal_ref_std * sc.frugal_ref_std;

  PolicyRun run;
  run.frames = static_cast<long>(trace.psnr.size());

  bool prev_was_detect = false;
  bool have_detect = false;
  double mse_cum = 0.0;  // accumulated frame-to-frame MSE since last detection
  std::size_t detect_frame_idx = 0;
  double iou_sum = 0.0;

  for (std::size_t t = 0; t < trace.psnr.size(); ++t) {
    const double psnr_t = trace.psnr[t];
    bool do_detect = false;

    switch (policy) {
      case Algorithm::kLeafOnly:
        do_detect = true;
        break;
      case Algorithm::kLeafFrugal: {
        if (!have_detect) {
          do_detect = true;
          break;
        }
        double similarity;
        if (!trace.frames.empty()) {
          const Frame& ref = trace.frames[detect_frame_idx];
          const Frame& cur = trace.frames[t + 1];
          try {
            similarity = ncc(ref, cur);
          } catch (const std::domain_error&) {
            similarity = 1.0;  // constant frames: treat as unchanged scene
          }
        } else {
          // Additive-noise model: consecutive MSEs accumulate, correlation
          // against the reference decays as 1/sqrt(1 + MSE/var).
          const double cum = mse_cum + mse_from_psnr(psnr_t);
          similarity = 1.0 / std::sqrt(1.0 + cum / var_ref);
        }
        do_detect = similarity < sc.frugal_ncc_threshold;
        break;
      }
      case Algorithm::kLeafAio: {
        const FrameAction action =
            step(st, scene, pref, prev_was_detect, psnr_t);
        do_detect = action == FrameAction::kDetect;
        break;
      }
      default:
        throw std::logic_error("not an offloading policy");
    }

    if (do_detect) {
      run.detects += 1;
      have_detect = true;
      mse_cum = 0.0;
      detect_frame_idx = t + 1;  // frames[t+1] is the current frame
      iou_sum += 1.0;            // boxes just refreshed, no tracking drift yet
    } else {
      mse_cum += mse_from_psnr(psnr_t);
      // Reported tracking accuracy: the scene fit evaluated at the measured
      // similarity between the detection reference and the current frame
      // (accumulated-MSE estimate in trace-only runs).
      iou_sum += scene.tracked_iou(psnr_from_mse(mse_cum, st.psnr_cap));
    }
    prev_was_detect = do_detect;
  }

  run.mean_pred_iou = iou_sum / static_cast<double>(run.frames);
  return run;
}

}  // namespace detail

// Per-frame offloading simulation: LEAF picks the configurations, then each
// offload policy decides detect-vs-track frame by frame, charging detection
// energy for offloads and the tracking table for local frames.
inline Report run_aio_scenario(const DeviceProfile& p, const Scenario& sc) {
  sc.validate();
  p.validate();

  const ResolvedTrace trace = resolve_trace(sc.trace);
  const double b_max = sc.b_max_sweep.front();
  std::vector<ClientSpec> specs = detail::apply_preference(
      sc.clients, detail::preference_points(sc).front());
  specs = resolve_latency_bounds(p, std::move(specs), b_max);

  const Allocation alloc = solve(p, specs, sc.solver, b_max);
  const SceneModel scene;

  const std::vector<Algorithm> policies =
      sc.algorithm == Algorithm::kLeafAio ||
              sc.algorithm == Algorithm::kLeafFrugal ||
              sc.algorithm == Algorithm::kLeafOnly
          ? std::vector<Algorithm>{sc.algorithm}
          : std::vector<Algorithm>{Algorithm::kLeafAio,
                                   Algorithm::kLeafFrugal,
                                   Algorithm::kLeafOnly};

  Report report;
  report.kind = Report::Kind::kAio;

  for (double ratio : sc.offload_sweep) {
    const OffloadPreference pref{ratio, 1.0};
    for (Algorithm policy : policies) {
      for (std::size_t k = 0; k < specs.size(); ++k) {
        const Configuration& cfg = alloc.configs[k];
        const double e_obj = energy_per_frame(p, specs[k], cfg).total;
        const double e_trk = lookup_freq_table(p.tracking_energy_table, cfg.f);
        const double l_trk = lookup_freq_table(p.tracking_latency_table, cfg.f);
        const double l_obj = latency_per_frame(p, cfg).total;

        const detail::PolicyRun run = detail::simulate_policy(
            p, sc, policy, specs[k], cfg, e_obj, pref, scene, trace);

        ReportRow row;
        row.algorithm = algorithm_name(policy);
        row.b_max = b_max;
        row.lambda1 = specs[k].lambda1;
        row.lambda2 = specs[k].lambda2;
        row.theta1 = pref.theta1;
        row.theta2 = pref.theta2;
        row.client = static_cast<int>(k);
        row.fps = specs[k].fps;
        row.f_ghz = cfg.f;
        row.s_px = cfg.s;
        row.b_mbps = cfg.b;
        row.frames = run.frames;
        row.detects = run.detects;
        const long tracks = run.frames - run.detects;
        row.energy_total_j = static_cast<double>(run.detects) * e_obj +
                             static_cast<double>(tracks) * e_trk;
        row.energy_j = row.energy_total_j / static_cast<double>(run.frames);
        row.latency_s = (static_cast<double>(run.detects) * l_obj +
                         static_cast<double>(tracks) * l_trk) /
                        static_cast<double>(run.frames);
        row.accuracy = accuracy(p, cfg.s);
        row.q_term = row.energy_j + specs[k].lambda1 * row.latency_s -
                     specs[k].lambda2 * row.accuracy;
        row.offload_fraction = static_cast<double>(run.detects) /
                               static_cast<double>(run.frames);
        row.data_mb = static_cast<double>(run.detects) * p.sigma * cfg.s *
                      cfg.s / 1e6;
        row.mean_pred_iou = run.mean_pred_iou;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace marsim
