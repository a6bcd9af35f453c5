#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace rmtk {

/// Identifies one independent random stream: an experiment-wide base seed
/// plus the index of the trial that owns the stream.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t trial_index = 0;

  /// Seed of a sub-stream owned by this stream, for work that needs several
  /// independent sources within one trial.
  SeedSpec child(std::uint64_t index) const;
};

/// Stream seed = splitmix64 finalizer applied to
/// base_seed XOR ((trial_index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t stream_seed(const SeedSpec& seed) noexcept;

/// splitmix64 output function (avalanche mix).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Per-stream generator. mt19937_64 is fully specified by the standard;
/// the real-valued draws below are computed from raw 64-bit outputs so the
/// streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const SeedSpec& seed) : engine_(stream_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller; the second variate of each pair is cached).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n), n > 0, unbiased.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rmtk
