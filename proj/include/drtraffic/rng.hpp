#pragma once

#include <cstdint>
#include <random>

namespace drtraffic {

// One stream per concern so that, e.g., enabling parameter randomization
// never shifts the spawn sequence.
enum class StreamId : std::uint64_t {
  kSpawn = 1,
  kParams = 2,
  kPolicy = 3,
  kReplay = 4,
  kEnv = 5,
  kInit = 6,
  kUpdate = 7,
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);
  RngStream(std::uint64_t seed, StreamId id)
      : RngStream(seed, static_cast<std::uint64_t>(id)) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace drtraffic
