#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "marsim/poly.hpp"
#include "marsim/profile.hpp"

namespace marsim {

// Quadratic tracking-accuracy fit IOU(PSNR) for one scene attribute.
// Evaluations are clamped into [0, 1] before use.
struct SceneModel {
  Poly iou_coeffs = {-2.328, 0.2411, -0.004335};  // motion-blur fit
  std::string attribute = "motion_blur";

  double tracked_iou(double psnr_db) const {
    return std::clamp(eval_poly(iou_coeffs, psnr_db), 0.0, 1.0);
  }
};

struct OffloadPreference {
  double theta1 = 1.0;  // energy weight
  double theta2 = 1.0;  // accuracy weight
};

enum class FrameAction { kDetect, kTrack };

// Per-client orchestrator state: PSNR history over the recent window, the
// derived gradient history, and the remaining tracking budget rho.
struct OrchestratorState {
  std::deque<double> psnr_history;  // newest at the back
  std::deque<double> grad_history;  // dB per frame, newest at the back
  int rho = 0;                      // frames left to track before offloading
  int window_frames = 30;           // history capacity ("past 2 seconds")
  double decay = 0.3;               // exponential weight decay, newest heaviest
  double e_obj = 1.0;               // J per offloaded detection
  FreqTable e_trk_table;            // J per tracked frame vs GHz
  double f_ghz = 1.0;               // frequency the tracker runs at
  int rho_max = 120;                // search cap for the tracking budget
  double psnr_cap = 100.0;          // dB ceiling for extrapolated PSNR

  bool has_last_psnr = false;
  double last_psnr = 0.0;

  double e_trk() const { return lookup_freq_table(e_trk_table, f_ghz); }
};

inline OrchestratorState make_orchestrator_state(const DeviceProfile& profile,
                                                 const ClientSpec& spec,
                                                 double e_obj, double f_ghz,
                                                 int rho_max = 120,
                                                 double decay = 0.3) {
  OrchestratorState st;
  st.window_frames = static_cast<int>(std::ceil(2.0 * spec.fps));
  st.decay = decay;
  st.e_obj = e_obj;
  st.e_trk_table = profile.tracking_energy_table;
  st.f_ghz = f_ghz;
  st.rho_max = rho_max;
  st.psnr_cap = profile.psnr_cap_db;
  return st;
}

// Appends the newest consecutive-frame PSNR and its half-difference gradient
// v_i = (PSNR_i - PSNR_{i-1}) / 2. Histories are capped at window_frames.
inline void update_history(OrchestratorState& state, double psnr_prev_pair,
                           double psnr_curr_pair) {
  state.psnr_history.push_back(psnr_curr_pair);
  state.grad_history.push_back((psnr_curr_pair - psnr_prev_pair) / 2.0);
  while (static_cast<int>(state.psnr_history.size()) > state.window_frames) {
    state.psnr_history.pop_front();
  }
  while (static_cast<int>(state.grad_history.size()) > state.window_frames) {
    state.grad_history.pop_front();
  }
}

// Exponentially weighted mean of the recent PSNR gradients; the j-th newest
// entry carries weight exp(-decay * j).
inline double scene_rate(const OrchestratorState& state) {
  if (state.grad_history.empty()) {
    throw std::domain_error("scene_rate: empty gradient history");
  }
  double num = 0.0;
  double den = 0.0;
  int j = 0;
  for (auto it = state.grad_history.rbegin(); it != state.grad_history.rend();
       ++it, ++j) {
    const double w = std::exp(-state.decay * j);
    num += *it * w;
    den += w;
  }
  return num / den;
}

namespace detail {
inline double scene_rate_or_zero(const OrchestratorState& state) {
  return state.grad_history.empty() ? 0.0 : scene_rate(state);
}
}  // namespace detail

// Tracking accuracy expected after rho locally tracked frames: the latest
// PSNR extrapolated linearly at the estimated scene-change rate, clamped to
// [0, cap], then pushed through the scene's IOU fit.
inline double predict_iou(const OrchestratorState& state,
                          const SceneModel& scene, int rho,
                          double psnr_latest) {
  if (rho < 0) throw std::invalid_argument("predict_iou: rho must be >= 0");
  const double vbar = detail::scene_rate_or_zero(state);
  const double pred =
      std::clamp(psnr_latest + vbar * static_cast<double>(rho), 0.0,
                 state.psnr_cap);
  return scene.tracked_iou(pred);
}

// Cycle cost of one detection followed by rho tracked frames, traded against
// the predicted tracking accuracy.
inline double offload_objective(const OrchestratorState& state,
                                const SceneModel& scene,
                                const OffloadPreference& pref, int rho,
                                double psnr_latest) {
  const double energy = (state.e_obj + state.e_trk() * rho) /
                        static_cast<double>(1 + rho);
  return pref.theta1 * energy -
         pref.theta2 * predict_iou(state, scene, rho, psnr_latest);
}

// Exhaustive argmin of the cycle objective over {0, ..., rho_max}; ties go to
// the smaller budget (more frequent detection).
inline int solve_rho(const OrchestratorState& state, const SceneModel& scene,
                     const OffloadPreference& pref, double psnr_latest) {
  int best_rho = 0;
  double best_j = offload_objective(state, scene, pref, 0, psnr_latest);
  for (int rho = 1; rho <= state.rho_max; ++rho) {
    const double j = offload_objective(state, scene, pref, rho, psnr_latest);
    if (j < best_j) {
      best_j = j;
      best_rho = rho;
    }
  }
  return best_rho;
}

// One camera frame. psnr_latest is the similarity between the previous and
// the current frame. detection_result_arrived marks the frame on which the
// previous offload's result came back. Returns what to do with this frame.
inline FrameAction step(OrchestratorState& state, const SceneModel& scene,
                        const OffloadPreference& pref,
                        bool detection_result_arrived, double psnr_latest) {
  if (state.has_last_psnr) {
    update_history(state, state.last_psnr, psnr_latest);
  } else {
    state.psnr_history.push_back(psnr_latest);
  }
  state.last_psnr = psnr_latest;
  state.has_last_psnr = true;

  if (detection_result_arrived && state.rho == 0) {
    if (state.grad_history.empty()) {
      return FrameAction::kDetect;  // warmup: no rate estimate yet
    }
    state.rho = solve_rho(state, scene, pref, psnr_latest);
    return state.rho == 0 ? FrameAction::kDetect : FrameAction::kTrack;
  }
  if (state.rho > 0) {
    state.rho -= 1;
    return FrameAction::kTrack;
  }
  return FrameAction::kDetect;
}

}  // namespace marsim
