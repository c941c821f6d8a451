#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "marsim/aio.hpp"
#include "marsim/synth.hpp"
#include "oracles.hpp"

using namespace marsim;
using Catch::Approx;

namespace {
OrchestratorState basic_state(double e_obj = 1.0, double e_trk = 0.1,
                              int rho_max = 120) {
  OrchestratorState st;
  st.window_frames = 60;
  st.decay = 0.3;
  st.e_obj = e_obj;
  st.e_trk_table = {{0.3, e_trk}, {2.649, e_trk}};
  st.f_ghz = 1.0;
  st.rho_max = rho_max;
  st.psnr_cap = 100.0;
  return st;
}
}  // namespace

TEST_CASE("update_history appends the half-difference gradient") {
  OrchestratorState st = basic_state();
  update_history(st, 30.0, 30.0);
  CHECK(st.grad_history.back() == 0.0);
  update_history(st, 32.0, 28.0);
  CHECK(st.grad_history.back() == Approx(-2.0).epsilon(1e-15));
  update_history(st, 28.0, 32.0);
  CHECK(st.grad_history.back() == Approx(2.0).epsilon(1e-15));
  CHECK(st.psnr_history.size() == 3);
}

TEST_CASE("histories are capped at the window size") {
  OrchestratorState st = basic_state();
  st.window_frames = 4;
  for (int i = 0; i < 20; ++i) {
    update_history(st, 30.0, 30.0 + i);
  }
  CHECK(st.psnr_history.size() == 4);
  CHECK(st.grad_history.size() == 4);
  CHECK(st.psnr_history.back() == 49.0);
}

TEST_CASE("scene_rate weights newer gradients more") {
  OrchestratorState st = basic_state();
  CHECK_THROWS_AS(scene_rate(st), std::domain_error);

  // Constant gradients give the constant back regardless of decay.
  for (double v : {-1.5, -1.5, -1.5}) st.grad_history.push_back(v);
  CHECK(scene_rate(st) == Approx(-1.5).epsilon(1e-12));

  // A huge decay reduces the mean to the newest entry.
  st.grad_history.assign({0.0, -4.0});
  st.decay = 60.0;
  CHECK(scene_rate(st) == Approx(-4.0).margin(1e-12));

  // Hand-computed exponential weighting, newest entry -3.
  st.grad_history.assign({-1.0, -2.0, -3.0});
  st.decay = 1.0;
  const double e1 = std::exp(-1.0);
  const double e2 = std::exp(-2.0);
  const double expect = (-3.0 - 2.0 * e1 - 1.0 * e2) / (1.0 + e1 + e2);
  CHECK(scene_rate(st) == Approx(expect).epsilon(1e-12));
  CHECK(scene_rate(st) == Approx(-2.576).epsilon(1e-3));
}

TEST_CASE("predict_iou clamps the quadratic into [0, 1]") {
  OrchestratorState st = basic_state();
  const SceneModel scene;

  // Static scene: rho has no effect, direct quadratic evaluation.
  st.grad_history.assign({0.0});
  CHECK(predict_iou(st, scene, 0, 20.0) ==
        Approx(-0.004335 * 400.0 + 0.2411 * 20.0 - 2.328).epsilon(1e-12));
  CHECK(predict_iou(st, scene, 0, 20.0) == Approx(0.76).epsilon(1e-3));

  // The fit peaks slightly above 1 near its vertex; clamped.
  const double vertex = 0.2411 / (2.0 * 0.004335);
  CHECK(vertex == Approx(27.81).epsilon(1e-3));
  CHECK(predict_iou(st, scene, 0, vertex) == 1.0);
  CHECK(predict_iou(st, scene, 50, vertex) == 1.0);  // v=0 keeps the PSNR

  // Far-off PSNR values clamp to zero.
  CHECK(predict_iou(st, scene, 0, 2.0) == 0.0);

  // Zero extrapolation at the cap equals the direct quadratic at the cap.
  st.grad_history.assign({-1.0});
  CHECK(predict_iou(st, scene, 0, st.psnr_cap) ==
        scene.tracked_iou(st.psnr_cap));

  CHECK_THROWS_AS(predict_iou(st, scene, -1, 30.0), std::invalid_argument);
}

TEST_CASE("solve_rho matches the frozen brute-force value") {
  // e_obj=1, e_trk=0.1, theta1=theta2=1, psnr=30, vbar=-1: exhaustive J over
  // {0..120} bottoms out at rho=5.
  OrchestratorState st = basic_state(1.0, 0.1, 120);
  st.grad_history.assign({-1.0});
  const SceneModel scene;
  const OffloadPreference pref{1.0, 1.0};
  const int got = solve_rho(st, scene, pref, 30.0);
  const int expect = oracle::brute_force_rho(1.0, 0.1, 1.0, 1.0, 30.0, -1.0,
                                             100.0, 120, scene.iou_coeffs);
  CHECK(expect == 5);
  CHECK(got == 5);
}

TEST_CASE("solve_rho equals brute force on random parameter draws") {
  const SceneModel scene;
  SplitMix64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const double e_obj = rng.uniform(0.2, 6.0);
    const double e_trk = rng.uniform(0.01, 1.0);
    const double theta1 = rng.uniform(0.05, 8.0);
    const double theta2 = rng.uniform(0.05, 8.0);
    const double psnr = rng.uniform(5.0, 45.0);
    const double vbar = rng.uniform(-3.0, 1.5);
    const int rho_max = rng.uniform_int(10, 200);

    OrchestratorState st = basic_state(e_obj, e_trk, rho_max);
    st.grad_history.assign({vbar});
    const OffloadPreference pref{theta1, theta2};
    CHECK(solve_rho(st, scene, pref, psnr) ==
          oracle::brute_force_rho(e_obj, e_trk, theta1, theta2, psnr, vbar,
                                  st.psnr_cap, rho_max, scene.iou_coeffs));
  }
}

TEST_CASE("solve_rho favors maximal tracking when accuracy carries no weight") {
  OrchestratorState st = basic_state(1.0, 0.1, 120);
  st.grad_history.assign({-2.0});
  const SceneModel scene;
  CHECK(solve_rho(st, scene, {1.0, 0.0}, 30.0) == 120);
}

TEST_CASE("solve_rho stays at zero when tracking saves no energy") {
  // e_trk >= e_obj makes the energy term non-decreasing in rho, and a
  // degrading scene makes tracking cost accuracy.
  OrchestratorState st = basic_state(0.5, 0.5, 120);
  st.grad_history.assign({-1.0});
  const SceneModel scene;
  CHECK(solve_rho(st, scene, {1.0, 1.0}, 27.0) == 0);

  OrchestratorState worse = basic_state(0.5, 0.9, 120);
  worse.grad_history.assign({-1.0});
  CHECK(solve_rho(worse, scene, {1.0, 1.0}, 27.0) == 0);
}

TEST_CASE("static scene at the accuracy-maximizing PSNR tracks maximally") {
  OrchestratorState st = basic_state(1.0, 0.1, 120);
  st.grad_history.assign({0.0});
  const SceneModel scene;
  const double vertex = 0.2411 / (2.0 * 0.004335);
  CHECK(solve_rho(st, scene, {1.0, 1.0}, vertex) == 120);
}

TEST_CASE("step walks the detect/track state machine") {
  const SceneModel scene;
  const OffloadPreference pref{1.0, 1.0};

  SECTION("countdown branch decrements and tracks") {
    OrchestratorState st = basic_state();
    st.rho = 3;
    st.has_last_psnr = true;
    st.last_psnr = 30.0;
    CHECK(step(st, scene, pref, false, 30.0) == FrameAction::kTrack);
    CHECK(st.rho == 2);
  }

  SECTION("a zero budget right after solving means detect next") {
    OrchestratorState st = basic_state(0.5, 0.5);  // no energy gain
    st.has_last_psnr = true;
    st.last_psnr = 27.0;
    update_history(st, 28.0, 27.0);
    const FrameAction action = step(st, scene, pref, true, 26.0);
    CHECK(action == FrameAction::kDetect);
    CHECK(st.rho == 0);
  }

  SECTION("a solved budget of n yields n tracks then a detect") {
    OrchestratorState st = basic_state(1.0, 0.1);
    st.has_last_psnr = true;
    st.last_psnr = 30.0;
    update_history(st, 31.0, 30.0);
    const FrameAction first = step(st, scene, pref, true, 29.0);
    REQUIRE(st.rho > 0);
    CHECK(first == FrameAction::kTrack);
    const int budget = st.rho;
    for (int i = 0; i < budget; ++i) {
      CHECK(step(st, scene, pref, false, 29.0) == FrameAction::kTrack);
    }
    CHECK(st.rho == 0);
    CHECK(step(st, scene, pref, false, 29.0) == FrameAction::kDetect);
  }

  SECTION("warmup keeps offloading until a gradient sample exists") {
    OrchestratorState st = basic_state();
    CHECK(step(st, scene, pref, false, 30.0) == FrameAction::kDetect);
    CHECK(step(st, scene, pref, true, 30.0) != FrameAction::kDetect);
  }
}
