#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>

#include "marsim/json_io.hpp"

using namespace marsim;
using Catch::Approx;

namespace {
bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}
}  // namespace

TEST_CASE("profile round-trips through its file form bit-exactly") {
  namespace fs = std::filesystem;
  const DeviceProfile p = default_profile();
  const auto path = fs::temp_directory_path() / "marsim_profile.json";
  save_text_file(path.string(), profile_to_json(p).dump(2));
  const DeviceProfile q = load_profile_file(path.string());
  fs::remove(path);

  CHECK(bit_equal(p.p_pro, q.p_pro));
  CHECK(bit_equal(p.t_pro, q.t_pro));
  CHECK(bit_equal(p.p_tail, q.p_tail));
  CHECK(bit_equal(p.t_tail, q.t_tail));
  CHECK(p.e_gt_coeffs == q.e_gt_coeffs);
  CHECK(p.e_prv_coeffs == q.e_prv_coeffs);
  CHECK(p.p_cv_coeffs == q.p_cv_coeffs);
  CHECK(p.l_cv_coeffs == q.l_cv_coeffs);
  CHECK(p.r_star_coeffs == q.r_star_coeffs);
  CHECK(p.p_tr_coeffs == q.p_tr_coeffs);
  CHECK(p.l_inf_coeffs == q.l_inf_coeffs);
  CHECK(p.p_bs_coeffs == q.p_bs_coeffs);
  CHECK(bit_equal(p.r_max_slope, q.r_max_slope));
  CHECK(p.model_sizes == q.model_sizes);
  CHECK(bit_equal(p.sigma, q.sigma));
  CHECK(bit_equal(p.accuracy_a, q.accuracy_a));
  CHECK(bit_equal(p.accuracy_b, q.accuracy_b));
  CHECK(bit_equal(p.l_inf_norm, q.l_inf_norm));
  CHECK(p.tracking_energy_table == q.tracking_energy_table);
  CHECK(p.tracking_latency_table == q.tracking_latency_table);
}

TEST_CASE("bundled profile file matches the built-in defaults bit-exactly") {
  const DeviceProfile code = default_profile();
  const DeviceProfile file =
      load_profile_file(std::string(MARSIM_SOURCE_DIR) +
                        "/data/default_profile.json");
  CHECK(profile_to_json(code).dump() == profile_to_json(file).dump());
}

TEST_CASE("profile validation rejects broken profiles") {
  DeviceProfile p = default_profile();
  p.f_min = 3.0;  // above f_max
  CHECK_THROWS_AS(p.validate(), ValidationError);

  DeviceProfile q = default_profile();
  q.model_sizes = {224.0, 224.0};
  CHECK_THROWS_AS(q.validate(), ValidationError);

  DeviceProfile r = default_profile();
  r.sigma = 0.0;
  CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("scenario json loads clients, sweeps, and trace settings") {
  const json j = json::parse(R"({
    "clients": [
      {"fps": 9},
      {"fps": 30, "lambda1": 0.5, "lambda2": 2.5, "l_max": 3.0}
    ],
    "default_lambda1": 0.3,
    "default_lambda2": 1.8,
    "b_max": [100, 200],
    "preference_ratios": [2, 10],
    "offload_ratios": [0.5, 1, 2],
    "algorithm": "leaf",
    "trace": {"type": "synthetic", "seed": 7, "length": 120,
              "start_db": 30, "drift_db": -0.1, "noise_db": 0.4},
    "frugal_ncc_threshold": 0.5
  })");
  const Scenario sc = scenario_from_json(j);
  REQUIRE(sc.clients.size() == 2);
  CHECK(sc.clients[0].fps == 9);
  CHECK(sc.clients[0].lambda1 == 0.3);
  CHECK(sc.clients[0].lambda2 == 1.8);
  CHECK(sc.clients[0].l_max == 0.0);
  CHECK(sc.clients[1].lambda1 == 0.5);
  CHECK(sc.clients[1].l_max == 3.0);
  CHECK(sc.b_max_sweep == std::vector<double>{100.0, 200.0});
  REQUIRE(sc.preference_sweep.size() == 2);
  CHECK(sc.preference_sweep[0].first == 0.3);
  CHECK(sc.preference_sweep[0].second == Approx(0.6));
  CHECK(sc.preference_sweep[1].second == Approx(3.0));
  CHECK(sc.offload_sweep == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(sc.trace.seed == 7);
  CHECK(sc.trace.length == 120);
}

TEST_CASE("scenario json rejects missing clients and bad algorithms") {
  CHECK_THROWS_AS(scenario_from_json(json::parse(R"({"b_max": 100})")),
                  ValidationError);
  CHECK_THROWS_AS(scenario_from_json(json::parse(
                      R"({"clients": [{"fps": 5}], "algorithm": "nope"})")),
                  ValidationError);
}

TEST_CASE("allocation serializes with its trace") {
  Allocation alloc;
  alloc.configs = {{1.0, 320.0, 50.0}};
  alloc.q_value = -1.25;
  alloc.q_relaxed = -1.3;
  alloc.rounding_gap = 0.05;
  alloc.trace = {3.0, 1.0, -1.3};
  alloc.converged = true;
  alloc.outer_iters = 3;
  alloc.duals.mu = 0.01;
  alloc.duals.beta = {0.0};
  const json j = allocation_to_json(alloc);
  CHECK(j["q_trace"].size() == 3);
  CHECK(j["configs"][0]["s_px"] == 320.0);
  CHECK(j["converged"] == true);
}
