#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "marsim/marsim.hpp"
#include "marsim/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct CliOptions {
  std::string profile_path;
  std::string scenario_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double bmax = 0.0;
  bool bmax_set = false;
  double lambda1 = 0.0;
  bool lambda1_set = false;
  double lambda2 = 0.0;
  bool lambda2_set = false;
  double theta_ratio = 0.0;
  bool theta_ratio_set = false;
  double tau = 0.0;
  bool tau_set = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--profile", opt.profile_path, "device profile JSON");
  cmd->add_option("--scenario", opt.scenario_path, "scenario JSON");
  cmd->add_option("--out", opt.out_path, "output file path");
  cmd->add_option("--format", opt.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", opt.seed, "trace seed override")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--bmax", opt.bmax, "total bandwidth override, Mbps")
      ->each([&opt](const std::string&) { opt.bmax_set = true; });
  cmd->add_option("--lambda1", opt.lambda1, "latency weight override")
      ->each([&opt](const std::string&) { opt.lambda1_set = true; });
  cmd->add_option("--lambda2", opt.lambda2, "accuracy weight override")
      ->each([&opt](const std::string&) { opt.lambda2_set = true; });
  cmd->add_option("--theta-ratio", opt.theta_ratio,
                  "offload preference ratio theta1/theta2 override")
      ->each([&opt](const std::string&) { opt.theta_ratio_set = true; });
  cmd->add_option("--tau", opt.tau, "outer-loop convergence tolerance override")
      ->each([&opt](const std::string&) { opt.tau_set = true; });
}

marsim::DeviceProfile resolve_profile(const CliOptions& opt) {
  if (opt.profile_path.empty()) return marsim::default_profile();
  return marsim::load_profile_file(opt.profile_path);
}

marsim::Scenario resolve_scenario(const CliOptions& opt) {
  if (opt.scenario_path.empty()) {
    throw marsim::ValidationError({"--scenario is required for this command"});
  }
  marsim::Scenario sc = marsim::load_scenario_file(opt.scenario_path);
  if (opt.bmax_set) sc.b_max_sweep = {opt.bmax};
  if (opt.lambda1_set || opt.lambda2_set) {
    double l1 = opt.lambda1_set ? opt.lambda1 : 0.3;
    double l2 = opt.lambda2_set ? opt.lambda2 : 1.8;
    if (!sc.preference_sweep.empty()) {
      if (!opt.lambda1_set) l1 = sc.preference_sweep.front().first;
      if (!opt.lambda2_set) l2 = sc.preference_sweep.front().second;
    }
    sc.preference_sweep = {{l1, l2}};
  }
  if (opt.theta_ratio_set) sc.offload_sweep = {opt.theta_ratio};
  if (opt.tau_set) sc.solver.tau = opt.tau;
  if (opt.seed_set) sc.trace.seed = opt.seed;
  sc.validate();
  return sc;
}

void write_report(const marsim::Report& report, const CliOptions& opt) {
  const std::string text = opt.format == "csv"
                               ? marsim::report_to_csv(report)
                               : marsim::report_to_json(report).dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    marsim::save_text_file(opt.out_path, text);
  }
}

void print_machine_error(const std::string& kind, const std::string& message) {
  marsim::json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

int cmd_validate(const CliOptions& opt) {
  const marsim::DeviceProfile profile = resolve_profile(opt);
  profile.validate();
  std::cout << "profile: ok\n";
  if (!opt.scenario_path.empty()) {
    marsim::Scenario sc = marsim::load_scenario_file(opt.scenario_path);
    sc.validate();
    std::cout << "scenario: ok (" << sc.clients.size() << " clients)\n";
  }
  return kExitOk;
}

int cmd_solve(const CliOptions& opt) {
  const marsim::DeviceProfile profile = resolve_profile(opt);
  marsim::Scenario sc = resolve_scenario(opt);
  sc.b_max_sweep = {sc.b_max_sweep.front()};
  if (!sc.preference_sweep.empty()) {
    sc.preference_sweep = {sc.preference_sweep.front()};
  }

  const marsim::Report report = marsim::run_leaf_scenario(profile, sc);
  bool feasible = true;
  double q_total = 0.0;
  double sum_b = 0.0;
  std::cout << "algorithm " << marsim::algorithm_name(sc.algorithm)
            << ", B_max " << marsim::format_double(sc.b_max_sweep.front())
            << " Mbps\n";
  std::cout << "client fps f_ghz s_px b_mbps energy_j latency_s accuracy "
               "q_client\n";
  for (const auto& row : report.rows) {
    feasible = feasible && row.feasible;
    q_total += row.q_term;
    sum_b += row.b_mbps;
    std::cout << row.client << ' ' << row.fps << ' ';
    if (row.feasible) {
      std::cout << marsim::format_double(row.f_ghz) << ' '
                << marsim::format_double(row.s_px) << ' '
                << marsim::format_double(row.b_mbps) << ' '
                << marsim::format_double(row.energy_j) << ' '
                << marsim::format_double(row.latency_s) << ' '
                << marsim::format_double(row.accuracy) << ' '
                << marsim::format_double(row.q_term) << '\n';
    } else {
      std::cout << "infeasible (" << row.note << ")\n";
    }
  }
  std::cout << "Q " << marsim::format_double(q_total) << ", sum_b "
            << marsim::format_double(sum_b) << " Mbps\n";
  if (!opt.out_path.empty()) {
    CliOptions out_opt = opt;
    write_report(report, out_opt);
  }
  if (!feasible) {
    print_machine_error("infeasible", "one or more rows flagged infeasible");
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_sweep(const CliOptions& opt) {
  const marsim::DeviceProfile profile = resolve_profile(opt);
  marsim::Scenario sc = resolve_scenario(opt);
  marsim::Report merged;
  merged.kind = marsim::Report::Kind::kLeaf;
  for (marsim::Algorithm alg :
       {marsim::Algorithm::kLeaf, marsim::Algorithm::kFactLike,
        marsim::Algorithm::kMine}) {
    sc.algorithm = alg;
    marsim::Report part = marsim::run_leaf_scenario(profile, sc);
    for (auto& row : part.rows) merged.rows.push_back(std::move(row));
    for (auto& rec : part.solves) merged.solves.push_back(std::move(rec));
  }
  write_report(merged, opt);
  return kExitOk;
}

int cmd_aio_run(const CliOptions& opt) {
  const marsim::DeviceProfile profile = resolve_profile(opt);
  marsim::Scenario sc = resolve_scenario(opt);
  // Any non-policy algorithm value makes the harness compare all three
  // offloading policies per swept preference point.
  sc.algorithm = marsim::Algorithm::kLeaf;
  const marsim::Report report = marsim::run_aio_scenario(profile, sc);
  write_report(report, opt);
  return kExitOk;
}

int cmd_emit_default_profile(const CliOptions& opt) {
  const std::string text =
      marsim::profile_to_json(marsim::default_profile()).dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    marsim::save_text_file(opt.out_path, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marsim: edge-assisted mobile-AR energy/offloading simulator"};
  app.set_version_flag("--version", marsim::kVersion);
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* validate = app.add_subcommand("validate", "check profile/scenario");
  CLI::App* solve = app.add_subcommand("solve", "solve one allocation point");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "bandwidth/preference sweep across LEAF, FACT_LIKE, MINE");
  CLI::App* aio =
      app.add_subcommand("aio-run", "per-frame offload policy comparison");
  CLI::App* emit = app.add_subcommand("emit-default-profile",
                                      "write the bundled device profile");
  for (CLI::App* cmd : {validate, solve, sweep, aio, emit}) {
    add_common_flags(cmd, opt);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(opt);
    if (app.got_subcommand(solve)) return cmd_solve(opt);
    if (app.got_subcommand(sweep)) return cmd_sweep(opt);
    if (app.got_subcommand(aio)) return cmd_aio_run(opt);
    if (app.got_subcommand(emit)) return cmd_emit_default_profile(opt);
    return kExitUsage;
  } catch (const marsim::InfeasibleAllocation& e) {
    print_machine_error("infeasible", e.what());
    return kExitInfeasible;
  } catch (const marsim::ValidationError& e) {
    print_machine_error("validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    print_machine_error("io", e.what());
    return kExitIo;
  }
}
