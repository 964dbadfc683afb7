#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace semiflow {

/// Counter-based pseudo-random generator (splitmix64 finalizer over a
/// key/counter pair). Every draw is a pure function of (key, counter), so
/// substreams can be split per complex index or per purpose tag without
/// sharing state, and sequences are identical across platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ kKeyInit)) {}

  /// Independent substream keyed by a tag; starts at counter zero.
  CounterRng fork(std::uint64_t tag) const {
    return CounterRng(key_, mix(key_ ^ mix(tag ^ kForkInit)));
  }

  std::uint64_t next_u64() { return mix(key_ ^ mix(++counter_ + key_)); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  /// Standard normal via Box-Muller; caches the spare draw.
  double normal();

  Eigen::VectorXd normal_vec(int n);
  Eigen::MatrixXd normal_mat(int rows, int cols);

  /// Uniformly random point in the unit ball (rejection-free, radial).
  Eigen::Vector3d in_unit_ball();

  /// Uniformly random unit direction.
  Eigen::Vector3d unit_vector();

 private:
  CounterRng(std::uint64_t parent_key, std::uint64_t derived)
      : key_(derived ^ parent_key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kKeyInit = 0x5EA1F10000000001ULL;
  static constexpr std::uint64_t kForkInit = 0xA3C59AC2F0CD51DBULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

}  // namespace semiflow
