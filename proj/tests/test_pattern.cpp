#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "framesync/io.hpp"
#include "framesync/pattern.hpp"

using namespace framesync;

namespace {

// Test-side oracle, written against the definition rather than the library
// loop: distance of the pattern to (star^i, s_1..s_{N-i}).
std::uint32_t naive_shift_distance(const SyncPattern& p, std::uint32_t i) {
  std::vector<std::uint32_t> shifted(p.N, p.star);
  for (std::uint32_t k = i; k < p.N; ++k) shifted[k] = p.symbols[k - i];
  std::uint32_t d = 0;
  for (std::uint32_t k = 0; k < p.N; ++k) d += shifted[k] != p.symbols[k];
  return d;
}

std::uint32_t circular_distance(const std::vector<std::uint8_t>& bits, std::uint32_t shift) {
  const std::uint32_t l = static_cast<std::uint32_t>(bits.size());
  std::uint32_t d = 0;
  for (std::uint32_t k = 0; k < l; ++k) d += bits[k] != bits[(k + shift) % l];
  return d;
}

SyncPattern all_xbar_pattern(std::uint32_t N) {
  SyncPattern p;
  p.N = N;
  p.x_bar = 1;
  p.star = 0;
  p.K = 0;
  p.symbols.assign(N, 1);
  return p;
}

}  // namespace

TEST_CASE("m-sequence of degree 2") {
  const MSequence s = generate_msequence(2);
  REQUIRE(s.bits.size() == 3);
  REQUIRE(std::count(s.bits.begin(), s.bits.end(), 1) == 2);
  for (std::uint32_t sh = 1; sh < 3; ++sh) REQUIRE(circular_distance(s.bits, sh) == 2);
}

TEST_CASE("m-sequence of degree 3") {
  const MSequence s = generate_msequence(3);
  REQUIRE(s.bits.size() == 7);
  REQUIRE(std::count(s.bits.begin(), s.bits.end(), 1) == 4);
  for (std::uint32_t sh = 1; sh < 7; ++sh) REQUIRE(circular_distance(s.bits, sh) == 4);
  REQUIRE(s.bits == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 1, 0});
}

TEST_CASE("m-sequence rejects out-of-range degrees") {
  REQUIRE_THROWS_AS(generate_msequence(1), UnsupportedDegree);
  REQUIRE_THROWS_AS(generate_msequence(17), UnsupportedDegree);
}

TEST_CASE("every supported degree is balanced and shift-distant") {
  for (std::uint32_t m = kMinDegree; m <= kMaxDegree; ++m) {
    const MSequence s = generate_msequence(m);
    const std::uint32_t l = (1u << m) - 1;
    REQUIRE(s.bits.size() == l);
    REQUIRE(std::count(s.bits.begin(), s.bits.end(), 1) == (1 << (m - 1)));
    if (m <= 8) {
      for (std::uint32_t sh = 1; sh < l; ++sh)
        REQUIRE(circular_distance(s.bits, sh) == (l + 1) / 2);
    }
  }
}

TEST_CASE("degree selection picks the largest supported fit") {
  REQUIRE(msequence_degree_for(3) == 2);
  REQUIRE(msequence_degree_for(6) == 2);
  REQUIRE(msequence_degree_for(7) == 3);
  REQUIRE(msequence_degree_for(14) == 3);
  REQUIRE(msequence_degree_for(15) == 4);
  REQUIRE(msequence_degree_for(65534) == 15);
  REQUIRE(msequence_degree_for(65535) == 16);
  REQUIRE(msequence_degree_for(1u << 20) == 16);
}

TEST_CASE("pattern construction for N=21, K=3") {
  const SyncPattern p = build_pattern(make_bsc(0.1), 21, 3);
  REQUIRE(p.m == 3);
  REQUIRE(p.x_bar == 1);
  REQUIRE(p.star_count() == 4);
  REQUIRE(p.star_positions == std::vector<std::uint32_t>{3, 6, 9, 18});
  REQUIRE(static_cast<double>(p.star_count()) / p.N < 1.0 / 3.0);
  for (std::uint32_t i = 1; i <= p.N; ++i)
    if (i % 3 != 0) REQUIRE(p.symbols[i - 1] == p.x_bar);
  REQUIRE(pattern_string(p) == "XX.XX.XX.XXXXXXXX.XXX");
}

TEST_CASE("pattern too short") {
  try {
    build_pattern(make_bsc(0.1), 6, 3);
    FAIL("expected PatternTooShort");
  } catch (const PatternTooShort& e) {
    REQUIRE(e.min_N == 9);
  }
}

TEST_CASE("pattern construction preconditions") {
  REQUIRE_THROWS_AS(build_pattern(make_bsc(0.1), 21, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(build_pattern(make_bsc(0.5), 21, 3), DegenerateChannel);
  Channel noiseless;
  noiseless.input_alphabet = {"0", "1"};
  noiseless.output_alphabet = {"0", "1"};
  noiseless.star = 0;
  noiseless.matrix = {{1.0, 0.0}, {0.0, 1.0}};
  REQUIRE_THROWS_AS(build_pattern(noiseless, 21, 3), DegenerateChannel);
  REQUIRE_NOTHROW(build_pattern(noiseless, 21, 3, /*allow_infinite=*/true));
}

TEST_CASE("grid rule holds for assorted (N, K)") {
  const Channel ch = make_bsc(0.2);
  for (std::uint32_t N : {12u, 21u, 40u, 64u, 100u, 256u, 513u}) {
    for (std::uint32_t K : {2u, 3u, 8u}) {
      if (N / K < 3) continue;
      const SyncPattern p = build_pattern(ch, N, K);
      const MSequence ms = generate_msequence(p.m);
      REQUIRE(p.star_count() <= N / K);
      REQUIRE(p.star_count() ==
              std::count(ms.bits.begin(), ms.bits.end(), 1));
      for (std::uint32_t i = 1; i <= N; ++i) {
        if (i % K != 0)
          REQUIRE(p.symbols[i - 1] == p.x_bar);
        else
          REQUIRE((p.symbols[i - 1] == p.x_bar || p.symbols[i - 1] == p.star));
      }
      // grid slots beyond the m-sequence carry x_bar
      for (std::uint32_t j = ms.length() + 1; j <= N / K; ++j)
        REQUIRE(p.symbols[j * K - 1] == p.x_bar);
    }
  }
}

TEST_CASE("min shift distance of the degenerate all-x_bar pattern is 1") {
  const SyncPattern p = all_xbar_pattern(10);
  const ShiftDistance d = min_shift_distance(p);
  REQUIRE(d.distance == 1);
  REQUIRE(d.shift == 1);
}

TEST_CASE("min shift distance for N=21, K=3 (regression)") {
  const SyncPattern p = build_pattern(make_bsc(0.1), 21, 3);
  const ShiftDistance d = min_shift_distance(p);
  for (std::uint32_t i = 1; i <= p.N; ++i) {
    const std::uint32_t nd = naive_shift_distance(p, i);
    REQUIRE(nd >= d.distance);
    if (i % 3 == 0) REQUIRE(nd >= 4);  // (l+1)/2 for grid-aligned shifts
  }
  REQUIRE(d.distance == 5);
  REQUIRE(d.shift == 3);
}

TEST_CASE("full shift distance is N minus the star count") {
  const SyncPattern p = build_pattern(make_bsc(0.1), 64, 8);
  REQUIRE(naive_shift_distance(p, p.N) == p.N - p.star_count());
}

TEST_CASE("built patterns with stars never collide with a shift") {
  const Channel ch = make_bsc(0.3);
  for (std::uint32_t N : {24u, 40u, 90u, 128u}) {
    const SyncPattern p = build_pattern(ch, N, 4);
    REQUIRE(p.star_count() >= 1);
    for (std::uint32_t i = 1; i <= N; ++i) REQUIRE(naive_shift_distance(p, i) >= 1);
  }
}

TEST_CASE("shift distance grows with N at fixed K (regression)") {
  const Channel ch = make_bsc(0.1);
  const std::vector<std::uint32_t> lengths{64, 128, 256, 512};
  const std::vector<std::uint32_t> frozen{9, 14, 22, 38};
  std::uint32_t previous = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const SyncPattern p = build_pattern(ch, lengths[i], 8);
    const ShiftDistance d = min_shift_distance(p);
    REQUIRE(d.distance == frozen[i]);
    REQUIRE(d.distance >= previous);
    REQUIRE(d.distance >= (lengths[i] / 8 + 1) / 4);
    previous = d.distance;
  }
}
