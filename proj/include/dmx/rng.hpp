#pragma once

#include <cmath>
#include <cstdint>

namespace dmx {

/// Deterministic splitmix64 generator with a Box-Muller normal variate on top.
/// Every solver run that needs randomness goes through this class, so results
/// are reproducible from the seed alone.
/// Seed of the stream_id-th stream of a master seed; stream 0 is the master
/// seed itself.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
  return master_seed + 0x9E3779B97F4A7C15ULL * stream_id;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(derive_stream_seed(master_seed, stream_id));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in the open interval (0, 1).
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dmx
