#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace marsim {

// splitmix64; fixed algorithm so traces are identical across platforms and
// standard-library versions.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1].
  double symmetric() { return 2.0 * uniform01() - 1.0; }

  // Uniform in [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform01() * (hi - lo + 1));
  }
};

// Consecutive-frame PSNR trace: linear drift plus bounded uniform noise,
// clamped into [0, 100] dB. Entry i models PSNR(frame i-1, frame i).
inline std::vector<double> synth_trace(std::uint64_t seed, int length,
                                       double drift_db_per_frame,
                                       double noise_db,
                                       double start_db = 40.0) {
  if (length < 3) throw std::invalid_argument("synth_trace: length must be >= 3");
  SplitMix64 rng(seed);
  std::vector<double> trace(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    const double noise = noise_db == 0.0 ? 0.0 : noise_db * rng.symmetric();
    const double v = start_db + drift_db_per_frame * i + noise;
    trace[static_cast<std::size_t>(i)] = std::clamp(v, 0.0, 100.0);
  }
  return trace;
}

}  // namespace marsim
