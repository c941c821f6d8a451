// Solves the configuration of a single 15-fps client and prints the
// per-frame cost breakdown at the chosen operating point.

#include <iostream>

#include "marsim/marsim.hpp"

int main() {
  using namespace marsim;

  const DeviceProfile profile = default_profile();
  ClientSpec client;
  client.fps = 15;
  client.lambda1 = 0.3;
  client.lambda2 = 1.8;
  client.l_max = 8.0;

  SolverConfig solver;
  const Allocation alloc = solve(profile, {client}, solver, 100.0);
  const Configuration& cfg = alloc.configs.front();
  const EnergyBreakdown e = energy_per_frame(profile, client, cfg);

  std::cout << "config: f=" << cfg.f << " GHz, s=" << cfg.s
            << " px, b=" << cfg.b << " Mbps\n";
  std::cout << "energy: img=" << e.e_img << " cv=" << e.e_cv
            << " com=" << e.e_com << " bs=" << e.e_bs << " total=" << e.total
            << " J\n";
  std::cout << "latency: " << e.latency << " s, accuracy "
            << accuracy(profile, cfg.s) << "\n";
  std::cout << "Q=" << alloc.q_value << " after " << alloc.outer_iters
            << " cycles (converged=" << alloc.converged << ")\n";
  return 0;
}
