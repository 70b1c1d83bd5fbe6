#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "framesync/channel.hpp"

namespace framesync {

struct UnsupportedDegree : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PatternTooShort : std::invalid_argument {
  PatternTooShort(std::uint32_t n, std::uint32_t k, std::uint32_t min_n)
      : std::invalid_argument("pattern length " + std::to_string(n) + " too short for K=" +
                              std::to_string(k) + "; N >= " + std::to_string(min_n) +
                              " required"),
        min_N(min_n) {}
  std::uint32_t min_N;
};

struct DegenerateChannel : std::domain_error {
  using std::domain_error::domain_error;
};

// Maximal-length shift-register sequence of period l = 2^m - 1. The only
// property the sync construction needs: every nontrivial circular shift is
// at Hamming distance exactly (l+1)/2.
struct MSequence {
  std::vector<std::uint8_t> bits;  // one period
  std::uint32_t degree = 0;
  std::uint32_t taps = 0;          // low-degree coefficient mask of the polynomial

  std::uint32_t length() const { return static_cast<std::uint32_t>(bits.size()); }
};

inline constexpr std::uint32_t kMinDegree = 2;
inline constexpr std::uint32_t kMaxDegree = 16;

// One fixed primitive polynomial per degree. Entry m holds the exponents
// below the leading x^m term as a bitmask (bit e set <=> coefficient of x^e,
// bit 0 being the constant term). Degree 5, x^5 + x^2 + 1, is 0b100101 with
// the leading term dropped: 0x5.
namespace detail {
// m:     2      3      4      5       6      7      8            9
//        x+1    x+1    x+1    x^2+1   x+1    x+1    x^4+x^3      x^4+1
//                                                   +x^2+1
// m:     10     11     12           13         14         15     16
//        x^3+1  x^2+1  x^6+x^4      x^4+x^3    x^5+x^3    x+1    x^5+x^3
//                      +x+1         +x+1       +x+1              +x^2+1
inline constexpr std::uint32_t kPrimitiveTaps[kMaxDegree + 1] = {
    0,    0,    0x3,  0x3,  0x3,  0x5,  0x3,  0x3, 0x1D,
    0x11, 0x9,  0x5,  0x53, 0x1B, 0x2B, 0x3,  0x2D};
}  // namespace detail

// Fibonacci LFSR seeded with the all-ones register. State keeps the next m
// sequence bits with the oldest at bit 0; each step emits bit 0 and shifts in
// the parity of (state & taps) at the top.
inline MSequence generate_msequence(std::uint32_t m) {
  if (m < kMinDegree || m > kMaxDegree)
    throw UnsupportedDegree("shift-register degree " + std::to_string(m) +
                            " outside [" + std::to_string(kMinDegree) + ".." +
                            std::to_string(kMaxDegree) + "]");
  const std::uint32_t taps = detail::kPrimitiveTaps[m];
  const std::uint32_t period = (1u << m) - 1;
  MSequence seq;
  seq.degree = m;
  seq.taps = taps;
  seq.bits.reserve(period);
  std::uint32_t state = period;  // all ones
  for (std::uint32_t i = 0; i < period; ++i) {
    seq.bits.push_back(static_cast<std::uint8_t>(state & 1u));
    const std::uint32_t fb = std::popcount(state & taps) & 1u;
    state = (state >> 1) | (fb << (m - 1));
  }
  return seq;
}

// Sync pattern: x_bar everywhere except on the K-grid, where an m-sequence
// decides between x_bar and the noise symbol. Grid arithmetic is 1-based to
// match s_1..s_N; storage is 0-based.
struct SyncPattern {
  std::vector<std::uint32_t> symbols;        // input indices, length N
  std::uint32_t N = 0;
  std::uint32_t x_bar = 0;
  std::uint32_t star = 0;
  std::uint32_t K = 0;
  std::uint32_t m = 0;                       // 0 for hand-built patterns
  std::vector<std::uint32_t> star_positions; // 1-based, ascending

  std::uint32_t star_count() const { return static_cast<std::uint32_t>(star_positions.size()); }
};

// Largest supported m with 2^m - 1 <= grid_slots; requires grid_slots >= 3.
inline std::uint32_t msequence_degree_for(std::uint32_t grid_slots) {
  std::uint32_t m = kMinDegree;
  while (m < kMaxDegree && (1u << (m + 1)) - 1 <= grid_slots) ++m;
  return m;
}

// When `allow_infinite` is set, a channel with alpha(Q) = +inf is accepted
// and x_bar is the lowest-index input achieving it; a zero threshold is
// always rejected (no maximally divergent symbol exists).
inline SyncPattern build_pattern(const Channel& ch, std::uint32_t N, std::uint32_t K,
                                 bool allow_infinite = false) {
  if (K < 2) throw std::invalid_argument("grid period K must be >= 2");
  if (N < 1) throw std::invalid_argument("pattern length N must be >= 1");
  const std::uint32_t grid_slots = N / K;
  if (grid_slots < 3) throw PatternTooShort(N, K, 3 * K);

  const ThresholdResult thr = sync_threshold(ch);
  if (thr.value == 0.0)
    throw DegenerateChannel("synchronization threshold is 0; no input is distinguishable from noise");
  if (thr.infinite() && !allow_infinite)
    throw DegenerateChannel("synchronization threshold is infinite; any asynchronism exponent is achievable");

  SyncPattern p;
  p.N = N;
  p.K = K;
  p.x_bar = thr.x_bar;
  p.star = ch.star;
  p.m = msequence_degree_for(grid_slots);
  const MSequence ms = generate_msequence(p.m);

  p.symbols.assign(N, p.x_bar);
  for (std::uint32_t j = 1; j <= grid_slots; ++j) {
    const std::uint32_t pos = j * K;  // 1-based
    if (pos > N) break;
    if (j <= ms.length() && ms.bits[j - 1] == 1) {
      p.symbols[pos - 1] = p.star;
      p.star_positions.push_back(pos);
    }
  }
  return p;
}

struct ShiftDistance {
  std::uint32_t distance = 0;
  std::uint32_t shift = 0;  // minimizing i, smallest on ties
};

// Hamming distance between s^N and (star^i, s_1..s_{N-i}) minimized over
// i in [1..N]. Brute force, O(N^2).
inline ShiftDistance min_shift_distance(const SyncPattern& p) {
  const std::uint32_t N = p.N;
  ShiftDistance best{N + 1, 0};
  for (std::uint32_t i = 1; i <= N; ++i) {
    std::uint32_t d = 0;
    for (std::uint32_t k = 1; k <= i; ++k)
      if (p.symbols[k - 1] != p.star) ++d;
    for (std::uint32_t k = i + 1; k <= N; ++k)
      if (p.symbols[k - i - 1] != p.symbols[k - 1]) ++d;
    if (d < best.distance) best = {d, i};
  }
  return best;
}

// 'X' for x_bar, '.' for the noise symbol.
inline std::string pattern_string(const SyncPattern& p) {
  std::string s;
  s.reserve(p.N);
  for (std::uint32_t sym : p.symbols) s.push_back(sym == p.star ? '.' : 'X');
  return s;
}

}  // namespace framesync
