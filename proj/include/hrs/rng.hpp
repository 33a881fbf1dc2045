#pragma once

#include <array>
#include <cstdint>

namespace hrs {

// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key);
};

// A reproducible random stream addressed by (seed, stream id).
//
// Every draw is a pure function of (seed, stream, draw index), so work can be
// partitioned across threads in any way without changing results: each
// molecule or sample owns its own stream id.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; implementation-independent unlike
  // std::normal_distribution.
  double normal();

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int position_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mix a tuple of identifiers into one stream id (splitmix64 finalizer).
std::uint64_t stream_id(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace hrs
