#include "spdeloc/random.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <numbers>

namespace spdeloc {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

constexpr int kLanes = 8;
constexpr size_t kChunk = 512;  // uniforms per inner batch (multiple of 2 * kLanes)

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Bulk uniforms for one block: kLanes independent xoshiro256+ streams whose states are drawn
// from Philox at counter (lane, block, substream/stream-high, stream).
struct BlockGenerator {
  alignas(64) uint64_t s0[kLanes], s1[kLanes], s2[kLanes], s3[kLanes];

  BlockGenerator(uint64_t seed, uint64_t stream, uint32_t substream, uint64_t block) {
    const std::array<uint32_t, 2> key{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
    const uint32_t c1 = static_cast<uint32_t>(block);
    const uint32_t c2 =
        static_cast<uint32_t>(block >> 32) ^ (substream << 16) ^ static_cast<uint32_t>(stream >> 32);
    const uint32_t c3 = static_cast<uint32_t>(stream);
    for (int l = 0; l < kLanes; ++l) {
      const auto a = philox4x32({2u * l, c1, c2, c3}, key);
      const auto b = philox4x32({2u * l + 1u, c1, c2, c3}, key);
      s0[l] = (uint64_t(a[0]) << 32) | a[1];
      s1[l] = (uint64_t(a[2]) << 32) | a[3];
      s2[l] = (uint64_t(b[0]) << 32) | b[1];
      s3[l] = (uint64_t(b[2]) << 32) | b[3];
      if ((s0[l] | s1[l] | s2[l] | s3[l]) == 0) s0[l] = 1;
    }
  }

  // n must be a multiple of kLanes.
  void uniforms(double* out, size_t n) {
    for (size_t r = 0; r < n; r += kLanes) {
#pragma omp simd
      for (int l = 0; l < kLanes; ++l) {
        const uint64_t res = s0[l] + s3[l];
        const uint64_t t = s1[l] << 17;
        s2[l] ^= s0[l];
        s3[l] ^= s1[l];
        s1[l] ^= s2[l];
        s0[l] ^= s3[l];
        s2[l] ^= t;
        s3[l] = rotl(s3[l], 45);
        out[r + l] = (static_cast<double>(res >> 11) + 0.5) * 0x1.0p-53;
      }
    }
  }
};

// log(u) for u in (0, 1], vectorizable (relative error ~1e-15).
inline double fast_log(double u) {
  const uint64_t bits = std::bit_cast<uint64_t>(u);
  const int64_t ebits = static_cast<int64_t>((bits >> 52) & 0x7ff) - 1023;
  double e = static_cast<double>(ebits);
  double m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
  // keep m in [sqrt(1/2), sqrt(2))
  const double shift = m > std::numbers::sqrt2 ? 1.0 : 0.0;
  m *= 1.0 - 0.5 * shift;
  e += shift;
  const double s = (m - 1.0) / (m + 1.0);
  const double s2 = s * s;
  double p = 1.0 / 23.0;
  p = p * s2 + 1.0 / 21.0;
  p = p * s2 + 1.0 / 19.0;
  p = p * s2 + 1.0 / 17.0;
  p = p * s2 + 1.0 / 15.0;
  p = p * s2 + 1.0 / 13.0;
  p = p * s2 + 1.0 / 11.0;
  p = p * s2 + 1.0 / 9.0;
  p = p * s2 + 1.0 / 7.0;
  p = p * s2 + 1.0 / 5.0;
  p = p * s2 + 1.0 / 3.0;
  p = p * s2 + 1.0;
  return 2.0 * s * p + e * std::numbers::ln2;
}

// cos and sin of 2πv for v in [0, 1), vectorizable.
inline void fast_sincos_turn(double v, double& c, double& s) {
  const double w = 4.0 * v;
  const double q = static_cast<double>(static_cast<int64_t>(w));  // w ≥ 0
  const double a = (w - q - 0.5) * (0.5 * std::numbers::pi);  // |a| ≤ π/4
  const double a2 = a * a;
  double sa = -1.0 / 1307674368000.0;
  sa = sa * a2 + 1.0 / 6227020800.0;
  sa = sa * a2 - 1.0 / 39916800.0;
  sa = sa * a2 + 1.0 / 362880.0;
  sa = sa * a2 - 1.0 / 5040.0;
  sa = sa * a2 + 1.0 / 120.0;
  sa = sa * a2 - 1.0 / 6.0;
  sa = (sa * a2 + 1.0) * a;
  double ca = 1.0 / 20922789888000.0;
  ca = ca * a2 - 1.0 / 87178291200.0;
  ca = ca * a2 + 1.0 / 479001600.0;
  ca = ca * a2 - 1.0 / 3628800.0;
  ca = ca * a2 + 1.0 / 40320.0;
  ca = ca * a2 - 1.0 / 720.0;
  ca = ca * a2 + 1.0 / 24.0;
  ca = ca * a2 - 0.5;
  ca = ca * a2 + 1.0;
  // base angle (q + 1/2)·π/2 for q = 0..3
  const double h = std::numbers::sqrt2 * 0.5;
  const double t1 = q > 0.5 ? 1.0 : 0.0;
  const double t2 = q > 1.5 ? 1.0 : 0.0;
  const double t3 = q > 2.5 ? 1.0 : 0.0;
  const double cb = h * (1.0 - 2.0 * (t1 - t3));
  const double sb = h * (1.0 - 2.0 * t2);
  c = cb * ca - sb * sa;
  s = sb * ca + cb * sa;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    const uint64_t p0 = static_cast<uint64_t>(kM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<uint32_t>(p1),
           static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

NormalStream::NormalStream(uint64_t seed, uint64_t stream, uint32_t substream)
    : seed_(seed), stream_(stream), substream_(substream) {}

void NormalStream::fill_uniform(uint64_t block, double* out, size_t n) const {
  BlockGenerator gen(seed_, stream_, substream_, block);
  alignas(64) double buf[kChunk];
  for (size_t start = 0; start < n; start += kChunk) {
    const size_t m = std::min(kChunk, n - start);
    gen.uniforms(buf, kChunk);
    std::copy(buf, buf + m, out + start);
  }
}

void NormalStream::fill(uint64_t block, double* out, size_t n) const {
  BlockGenerator gen(seed_, stream_, substream_, block);
  alignas(64) double u[kChunk];
  alignas(64) double z[kChunk];
  for (size_t start = 0; start < n; start += kChunk) {
    const size_t m = std::min(kChunk, n - start);
    const size_t need = ((m + 2 * kLanes - 1) / (2 * kLanes)) * (2 * kLanes);
    gen.uniforms(u, need);
    const size_t pairs = need / 2;
#pragma omp simd
    for (size_t i = 0; i < pairs; ++i) {
      const double r = std::sqrt(-2.0 * fast_log(u[2 * i]));
      double c, s;
      fast_sincos_turn(u[2 * i + 1], c, s);
      z[2 * i] = r * c;
      z[2 * i + 1] = r * s;
    }
    std::copy(z, z + m, out + start);
  }
}

}  // namespace spdeloc
