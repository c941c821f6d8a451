#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "marsim/errors.hpp"
#include "marsim/leaf.hpp"
#include "marsim/profile.hpp"

namespace marsim {

enum class Algorithm {
  kLeaf,
  kFactLike,
  kMine,
  kLeafAio,
  kLeafFrugal,
  kLeafOnly,
};

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kLeaf: return "LEAF";
    case Algorithm::kFactLike: return "FACT_LIKE";
    case Algorithm::kMine: return "MINE";
    case Algorithm::kLeafAio: return "LEAF_AIO";
    case Algorithm::kLeafFrugal: return "LEAF_FRUGAL";
    case Algorithm::kLeafOnly: return "LEAF_ONLY";
  }
  return "UNKNOWN";
}

inline Algorithm algorithm_from_name(const std::string& name) {
  if (name == "LEAF" || name == "leaf") return Algorithm::kLeaf;
  if (name == "FACT_LIKE" || name == "fact_like" || name == "fact")
    return Algorithm::kFactLike;
  if (name == "MINE" || name == "mine") return Algorithm::kMine;
  if (name == "LEAF_AIO" || name == "leaf_aio" || name == "aio")
    return Algorithm::kLeafAio;
  if (name == "LEAF_FRUGAL" || name == "leaf_frugal" || name == "frugal")
    return Algorithm::kLeafFrugal;
  if (name == "LEAF_ONLY" || name == "leaf_only")
    return Algorithm::kLeafOnly;
  throw ValidationError({"unknown algorithm: " + name});
}

// Where per-frame PSNR samples come from.
struct TraceSource {
  enum class Kind { kSynthetic, kPsnrFile, kPgmDir };
  Kind kind = Kind::kSynthetic;
  std::uint64_t seed = 42;
  int length = 600;
  double start_db = 28.0;
  double drift_db = -0.2;
  double noise_db = 0.05;
  std::string path;
};

struct Scenario {
  std::vector<ClientSpec> clients;
  std::vector<double> b_max_sweep = {300.0};
  // Preference points applied to every client; empty means "use the lambdas
  // already on the clients".
  std::vector<std::pair<double, double>> preference_sweep;
  std::vector<double> offload_sweep = {1.0};  // theta1/theta2 ratios
  TraceSource trace;
  Algorithm algorithm = Algorithm::kLeaf;
  double frugal_ncc_threshold = 0.5;
  // Reference frame deviation (intensity levels) behind the trace-only NCC
  // estimate used by the Frugal baseline when no frames are available.
  double frugal_ref_std = 40.0;
  SolverConfig solver;

  void validate() const {
    std::vector<std::string> issues;
    if (clients.empty()) issues.push_back("scenario needs at least one client");
    for (std::size_t i = 0; i < clients.size(); ++i) {
      const auto& c = clients[i];
      if (c.fps < 1 || c.lambda1 < 0.0 || c.lambda2 < 0.0 || c.l_max < 0.0) {
        issues.push_back("client " + std::to_string(i) + " has invalid fields");
      }
    }
    if (b_max_sweep.empty()) issues.push_back("b_max sweep is empty");
    for (double b : b_max_sweep) {
      if (!(b > 0.0)) {
        issues.push_back("b_max values must be > 0");
        break;
      }
    }
    for (const auto& [l1, l2] : preference_sweep) {
      if (l1 < 0.0 || l2 < 0.0) {
        issues.push_back("preference weights must be >= 0");
        break;
      }
    }
    if (offload_sweep.empty()) issues.push_back("offload sweep is empty");
    for (double r : offload_sweep) {
      if (!(r > 0.0)) {
        issues.push_back("offload ratios must be > 0");
        break;
      }
    }
    if (!(frugal_ncc_threshold > -1.0 && frugal_ncc_threshold < 1.0)) {
      issues.push_back("frugal_ncc_threshold must lie in (-1, 1)");
    }
    if (!(frugal_ref_std > 0.0)) {
      issues.push_back("frugal_ref_std must be > 0");
    }
    if (trace.kind == TraceSource::Kind::kSynthetic && trace.length < 3) {
      issues.push_back("synthetic trace length must be >= 3");
    }
    if (trace.kind != TraceSource::Kind::kSynthetic && trace.path.empty()) {
      issues.push_back("trace path required for file-backed traces");
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
};

// One client at one swept point.
struct ReportRow {
  std::string algorithm;
  double b_max = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  int client = 0;
  int fps = 0;
  double f_ghz = 0.0;
  double s_px = 0.0;
  double b_mbps = 0.0;
  double energy_j = 0.0;   // mean per frame
  double latency_s = 0.0;  // mean per frame
  double accuracy = 0.0;
  double q_term = 0.0;
  long frames = 0;
  long detects = 0;
  double energy_total_j = 0.0;
  double offload_fraction = 0.0;
  double data_mb = 0.0;
  double mean_pred_iou = 0.0;
  bool feasible = true;
  std::string note;
};

// Convergence record of one solver invocation, with the full Q trace.
struct SolveRecord {
  std::string algorithm;
  double b_max = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool converged = false;
  int outer_iters = 0;
  double q_value = 0.0;
  double q_relaxed = 0.0;
  double rounding_gap = 0.0;
  std::vector<double> trace;
};

// Aggregate of one (algorithm, swept point) group, always recomputed from
// rows, never stored independently.
struct AggregateRow {
  std::string algorithm;
  double b_max = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  int clients = 0;
  double q_total = 0.0;
  double mean_energy_j = 0.0;
  double mean_latency_s = 0.0;
  double mean_accuracy = 0.0;
  double mean_offload_fraction = 0.0;
  double mean_pred_iou = 0.0;
  double sum_b_mbps = 0.0;
  bool feasible = true;
};

struct Report {
  enum class Kind { kLeaf, kAio };
  Kind kind = Kind::kLeaf;
  std::vector<ReportRow> rows;
  std::vector<SolveRecord> solves;
};

inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::vector<AggregateRow> aggregate_rows(const Report& report) {
  std::vector<AggregateRow> out;
  auto matches = [](const AggregateRow& agg, const ReportRow& row) {
    return agg.algorithm == row.algorithm && agg.b_max == row.b_max &&
           agg.lambda1 == row.lambda1 && agg.lambda2 == row.lambda2 &&
           agg.theta1 == row.theta1 && agg.theta2 == row.theta2;
  };
  for (const auto& row : report.rows) {
    AggregateRow* agg = nullptr;
    for (auto& candidate : out) {
      if (matches(candidate, row)) {
        agg = &candidate;
        break;
      }
    }
    if (agg == nullptr) {
      out.emplace_back();
      agg = &out.back();
      agg->algorithm = row.algorithm;
      agg->b_max = row.b_max;
      agg->lambda1 = row.lambda1;
      agg->lambda2 = row.lambda2;
      agg->theta1 = row.theta1;
      agg->theta2 = row.theta2;
    }
    agg->clients += 1;
    agg->q_total += row.q_term;
    agg->mean_energy_j += row.energy_j;
    agg->mean_latency_s += row.latency_s;
    agg->mean_accuracy += row.accuracy;
    agg->mean_offload_fraction += row.offload_fraction;
    agg->mean_pred_iou += row.mean_pred_iou;
    agg->sum_b_mbps += row.b_mbps;
    agg->feasible = agg->feasible && row.feasible;
  }
  for (auto& agg : out) {
    const double n = static_cast<double>(agg.clients);
    agg.mean_energy_j /= n;
    agg.mean_latency_s /= n;
    agg.mean_accuracy /= n;
    agg.mean_offload_fraction /= n;
    agg.mean_pred_iou /= n;
  }
  return out;
}

inline std::string sanitize_csv_field(const std::string& s) {
  std::string out = s;
  for (auto& ch : out) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return out;
}

inline std::string report_to_csv(const Report& report) {
  std::ostringstream os;
  if (report.kind == Report::Kind::kLeaf) {
    os << "algorithm,b_max_mbps,lambda1,lambda2,client,fps,f_ghz,s_px,b_mbps,"
          "energy_j,latency_s,accuracy,q_client,feasible,note\n";
    for (const auto& r : report.rows) {
      os << r.algorithm << ',' << format_double(r.b_max) << ','
         << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ','
         << r.client << ',' << r.fps << ',' << format_double(r.f_ghz) << ','
         << format_double(r.s_px) << ',' << format_double(r.b_mbps) << ','
         << format_double(r.energy_j) << ',' << format_double(r.latency_s)
         << ',' << format_double(r.accuracy) << ',' << format_double(r.q_term)
         << ',' << (r.feasible ? 1 : 0) << ',' << sanitize_csv_field(r.note)
         << '\n';
    }
  } else {
    os << "policy,theta1,theta2,client,fps,frames,detects,offload_fraction,"
          "mean_energy_j,mean_latency_s,mean_pred_iou,data_mb,accuracy,"
          "q_client,feasible,note\n";
    for (const auto& r : report.rows) {
      os << r.algorithm << ',' << format_double(r.theta1) << ','
         << format_double(r.theta2) << ',' << r.client << ',' << r.fps << ','
         << r.frames << ',' << r.detects << ','
         << format_double(r.offload_fraction) << ','
         << format_double(r.energy_j) << ',' << format_double(r.latency_s)
         << ',' << format_double(r.mean_pred_iou) << ','
         << format_double(r.data_mb) << ',' << format_double(r.accuracy) << ','
         << format_double(r.q_term) << ',' << (r.feasible ? 1 : 0) << ','
         << sanitize_csv_field(r.note) << '\n';
    }
  }
  return os.str();
}

}  // namespace marsim
