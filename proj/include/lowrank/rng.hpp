#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lowrank {

/// Identifies one reproducible random sequence.
///
/// Streams are addressed by (master_seed, stream_index). Replicated
/// experiments derive one stream per replication through child(), so the
/// numbers a replication sees never depend on which worker ran it.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_index = 0)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// A stream in a fresh family keyed by this stream; child(i) != child(j).
  RngStream child(std::uint64_t index) const;

  std::mt19937_64 engine() const;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
};

/// Engine plus the handful of variates the models need.
class Sampler {
 public:
  explicit Sampler(const RngStream& stream) : engine_(stream.engine()) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double exponential() { return exponential_(engine_); }
  /// Uniform random sign, +1 or -1.
  int sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lowrank
