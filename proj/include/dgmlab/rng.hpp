#pragma once

// Counter-based random numbers (Philox4x32-10).
//
// Every draw is a pure function of (seed, domain, stream, step, dim), so a
// stream consumed by one particle is bit-identical whether that particle is
// simulated alone, in a batch, or on another thread.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dgmlab {

// Separates independent uses of the same user seed.
enum class RngDomain : std::uint32_t {
  particle_brownian = 1,
  particle_initial = 2,
  meanfield_brownian = 3,
  meanfield_initial = 4,
  graph_drift = 5,
  graph_noise = 6,
  validation = 7,
  test = 8,
};

struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block hash(Block ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  // Two uniforms in the open interval (0, 1) with 53-bit resolution.
  std::array<double, 2> uniform2(RngDomain domain, std::uint64_t stream, std::uint32_t step,
                                 std::uint32_t dim) const {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(stream),
                                static_cast<std::uint32_t>(stream >> 32), step,
                                (static_cast<std::uint32_t>(domain) << 20) ^ dim};
    const auto out = Philox4x32::hash(ctr, key_);
    const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
    const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
    return {to_open_unit(a), to_open_unit(b)};
  }

  double uniform(RngDomain domain, std::uint64_t stream, std::uint32_t step,
                 std::uint32_t dim) const {
    return uniform2(domain, stream, step, dim)[0];
  }

  // Standard normal via Box-Muller (cosine branch only).
  double normal(RngDomain domain, std::uint64_t stream, std::uint32_t step,
                std::uint32_t dim) const {
    const auto [u1, u2] = uniform2(domain, stream, step, dim);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
};

}  // namespace dgmlab
