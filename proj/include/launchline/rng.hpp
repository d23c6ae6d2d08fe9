#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace launchline {

// All randomness in the project flows through RngStream instances whose seeds
// are derived from one master seed plus a path of stream tags. Trajectories,
// policy draws and calendar generation each get independent streams, so any
// component can be replayed in isolation and results do not depend on thread
// scheduling.

namespace stream_tag {
inline constexpr std::uint64_t calendar = 1;
inline constexpr std::uint64_t policy_draw = 2;
inline constexpr std::uint64_t trajectory = 3;
}  // namespace stream_tag

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Folds a tag path into a master seed. Order-sensitive.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t w : path) h = splitmix64(h ^ splitmix64(w));
  return h;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(master, path)) {}

  // Uniform in [0, 1) with 53 random bits. Hand-rolled instead of
  // uniform_real_distribution so streams are bit-identical across standard
  // library implementations.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be >= 1.
  int uniform_int(int n) {
    auto idx = static_cast<int>(uniform01() * n);
    return idx < n ? idx : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace launchline
