#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace marsim {

// Raised when a profile or scenario fails its invariant checks.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string msg = "validation failed:";
    for (const auto& s : issues) {
      msg += "\n  - " + s;
    }
    return msg;
  }

  std::vector<std::string> issues_;
};

// Raised when no bandwidth split can satisfy every client's latency bound.
// `clients` is the smallest set whose combined minimum-bandwidth demand
// already exceeds the budget (clients whose bound is unreachable at any
// bandwidth carry an infinite requirement).
class InfeasibleAllocation : public std::runtime_error {
 public:
  InfeasibleAllocation(std::vector<int> clients, std::vector<double> required_b,
                       double b_max)
      : std::runtime_error(describe(clients, required_b, b_max)),
        clients_(std::move(clients)),
        required_b_(std::move(required_b)),
        b_max_(b_max) {}

  const std::vector<int>& clients() const { return clients_; }
  const std::vector<double>& required_bandwidth() const { return required_b_; }
  double b_max() const { return b_max_; }

 private:
  static std::string describe(const std::vector<int>& clients,
                              const std::vector<double>& required_b,
                              double b_max) {
    std::string msg = "infeasible bandwidth allocation (B_max=" +
                      std::to_string(b_max) + " Mbps); violating clients:";
    for (std::size_t i = 0; i < clients.size(); ++i) {
      msg += " #" + std::to_string(clients[i]) + " needs " +
             std::to_string(required_b[i]) + " Mbps";
    }
    return msg;
  }

  std::vector<int> clients_;
  std::vector<double> required_b_;
  double b_max_;
};

// Raised when an iterative stage exhausts its retries without meeting its
// numerical tolerance.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marsim
