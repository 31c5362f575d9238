#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace spdeloc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);

// Stateless normal source: block `b` of stream (seed, stream, substream) is a fixed sequence of
// standard normals, so any replicate/step can be regenerated independently of the others.
class NormalStream {
 public:
  NormalStream(uint64_t seed, uint64_t stream, uint32_t substream = 0);

  // out[0..n) ← N(0,1) draws of block b (n is rounded up internally to an even count).
  void fill(uint64_t block, double* out, size_t n) const;
  // Uniforms in (0, 1), 53-bit resolution.
  void fill_uniform(uint64_t block, double* out, size_t n) const;

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint32_t substream_;
};

}  // namespace spdeloc
