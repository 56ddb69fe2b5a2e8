#pragma once

#include <cmath>
#include <cstdint>

namespace gwdual {

// Counter-based random number generation.
//
// Every random quantity in this project is drawn from a stream addressed by
// (master seed, stream tag, index words...). Streams are stateless functions
// of their key and a draw counter, so sampling order and thread count never
// change the result. The exact construction is pinned here (and in the
// README) so another implementation can reproduce outputs bit for bit:
//
//   golden      = 0x9E3779B97F4A7C15
//   mix64(z)    : z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//                 z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
//   derive(k,w) = mix64((k + golden) ^ mix64(w + golden))
//   draw n of stream k = mix64(k + (n+1) * golden)
//
// mix64 is the SplitMix64 finalizer; a stream is SplitMix64 evaluated at an
// arbitrary counter position. Signed words (times) enter as two's complement.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) {
  return mix64((key + kGolden) ^ mix64(word + kGolden));
}

// Stream tags keep unrelated consumers of the same master seed apart.
namespace stream_tag {
inline constexpr std::uint64_t kGridCell = 0x6772696443656C6Cull;    // "gridCell"
inline constexpr std::uint64_t kReplicate = 0x7265706C6963617Dull;   // MC replicates
inline constexpr std::uint64_t kBirthDeath = 0x62646576656E74ull;    // birth-death events
inline constexpr std::uint64_t kSweep = 0x7377656570303031ull;       // verification sweeps
}  // namespace stream_tag

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream from_words(std::uint64_t seed, std::uint64_t tag,
                              std::uint64_t w0, std::uint64_t w1) {
    return RngStream(derive_key(derive_key(derive_key(seed, tag), w0), w1));
  }

  /// Stream for one grid cell (t, x); independent of window and width.
  static RngStream for_cell(std::uint64_t seed, std::int64_t t, std::uint64_t x) {
    return from_words(seed, stream_tag::kGridCell, static_cast<std::uint64_t>(t), x);
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_u01() < p; }

  /// Geometric on {1, 2, ...} with success probability p, by inversion.
  std::uint64_t geometric_from_one(double p) {
    if (p >= 1.0) {
      ++counter_;  // keep the draw count law-independent
      return 1;
    }
    const double u = next_u01();
    const double k = std::floor(std::log1p(-u) / std::log1p(-p));
    return 1 + static_cast<std::uint64_t>(k);
  }

  /// Exponential with the given rate, by inversion.
  double exponential(double rate) { return -std::log1p(-next_u01()) / rate; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gwdual
