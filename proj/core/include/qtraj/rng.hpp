#pragma once

#include <array>
#include <cstdint>

namespace qtraj {

// Philox4x32-10 block function; pure function of (counter, key).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Counter-based random stream addressed by (master_seed, stream_index,
// substream). Two streams with different addresses never share a Philox
// block; the same address always reproduces the same draws.
//
// Counter layout: word 0 = block counter within the stream, word 1 =
// substream, words 2-3 = stream index. Key = master seed.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint32_t substream = 0);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  // Standard normal via Box-Muller; pairs are produced together and the
  // second value is cached.
  double normal();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qtraj
