#pragma once

#include <cstdint>
#include <span>

#include "fieldlab/grid.hpp"

namespace fieldlab {

// Stateless keyed mixing chain: a PRF over sequences of 64-bit words.
// Every random quantity in the library is a pure function of
// (master seed, stream tag, addressing words), which is what makes coupled
// resampling and overlap consistency possible: there are no sequential
// generator states anywhere.
class SeedChain {
 public:
  explicit SeedChain(std::uint64_t key);

  SeedChain& mix(std::uint64_t w);
  SeedChain& mix_coords(std::span<const Index> coords);

  // Finalizing avalanche; the chain itself is left untouched.
  std::uint64_t word() const;

 private:
  std::uint64_t h_;
};

// Stream tags for domain separation. Distinct tags give unrelated words for
// identical addresses.
namespace stream {
inline constexpr std::uint64_t kInnovation = 0x01;
inline constexpr std::uint64_t kResample = 0x02;
inline constexpr std::uint64_t kRedraw = 0x03;
inline constexpr std::uint64_t kPath = 0x04;
inline constexpr std::uint64_t kBootstrap = 0x05;
inline constexpr std::uint64_t kEnv = 0x06;
inline constexpr std::uint64_t kGeneric = 0x07;
}  // namespace stream

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                          std::uint64_t idx = 0);

// Uniform double in (0,1) from a 64-bit word (53-bit mantissa, offset so the
// endpoints are excluded).
double u01(std::uint64_t word);

// Inverse of the standard normal CDF (Wichura's PPND16), accurate to full
// double precision for u in (0,1).
double inv_normal_cdf(double u);

}  // namespace fieldlab
