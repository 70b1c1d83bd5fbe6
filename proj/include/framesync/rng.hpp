#pragma once

#include <array>
#include <bit>
#include <cstdint>

namespace framesync {

// Seed mixing and the simulation PRNG.
//
// Everything random in this library flows from explicit 64-bit seeds through
// the functions below, so results are bit-reproducible across platforms and
// worker counts. std::random distributions are avoided on purpose: their
// output is implementation-defined.

inline constexpr std::uint64_t kSeedGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 step (Vigna). Advances `state` and returns the next word.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += kSeedGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stateless avalanche of one word (a single splitmix64 draw).
constexpr std::uint64_t mix64(std::uint64_t v) noexcept {
  std::uint64_t s = v;
  return splitmix64_next(s);
}

// Seed-splitting rule used everywhere a stream is derived from another:
//
//   derive_seed(base, key) = mix64(base ^ mix64(key))
//
// Sweeps derive per-trial seeds as
//
//   trial_seed = derive_seed(derive_seed(derive_seed(master, N),
//                                        bit_cast<u64>(alpha)),
//                            trial_index)
//
// which depends only on the cell's content and the trial index, never on
// grid order or scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) noexcept {
  return mix64(base ^ mix64(key));
}

// xoshiro256++ (Blackman/Vigna), state filled from the seed via splitmix64.
class Xoshiro256pp {
 public:
  explicit constexpr Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
    state_[0] |= 1;  // the all-zero state is the one invalid seed
  }

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 significant bits.
  constexpr double next_double() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Multiply-shift map; the bias is
  // bound/2^64 and irrelevant at simulation scale.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace framesync
