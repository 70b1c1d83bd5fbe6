#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "framesync/rng.hpp"

namespace framesync {

// Discrete memoryless channel with a designated noise symbol. `matrix[x][y]`
// is the probability of observing output y when input x is sent; `star` is
// the input the receiver hears whenever the transmitter is idle.
struct Channel {
  std::vector<std::string> input_alphabet;
  std::vector<std::string> output_alphabet;
  std::vector<std::vector<double>> matrix;
  std::uint32_t star = 0;

  std::uint32_t num_inputs() const { return static_cast<std::uint32_t>(input_alphabet.size()); }
  std::uint32_t num_outputs() const { return static_cast<std::uint32_t>(output_alphabet.size()); }
  double q(std::uint32_t x, std::uint32_t y) const { return matrix[x][y]; }
};

inline constexpr double kRowSumTolerance = 1e-12;

enum class ChannelFault {
  None,
  BadShape,          // matrix dimensions disagree with the alphabets
  RowSum,            // a row deviates from 1 beyond kRowSumTolerance
  NegativeEntry,
  UnreachableOutput, // some output has Q(y|x) = 0 for every input
  BadStarIndex,
};

struct ValidationResult {
  ChannelFault fault = ChannelFault::None;
  std::string detail;
  bool ok() const { return fault == ChannelFault::None; }
};

inline ValidationResult validate(const Channel& ch) {
  const std::size_t nx = ch.input_alphabet.size();
  const std::size_t ny = ch.output_alphabet.size();
  if (nx == 0 || ny == 0)
    return {ChannelFault::BadShape, "alphabets must be nonempty"};
  if (ch.matrix.size() != nx)
    return {ChannelFault::BadShape,
            "matrix has " + std::to_string(ch.matrix.size()) + " rows, expected " +
                std::to_string(nx)};
  for (std::size_t x = 0; x < nx; ++x) {
    if (ch.matrix[x].size() != ny)
      return {ChannelFault::BadShape,
              "matrix row " + std::to_string(x) + " has " +
                  std::to_string(ch.matrix[x].size()) + " entries, expected " +
                  std::to_string(ny)};
  }
  if (ch.star >= nx)
    return {ChannelFault::BadStarIndex,
            "star index " + std::to_string(ch.star) + " out of range (" +
                std::to_string(nx) + " inputs)"};
  for (std::size_t x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = ch.matrix[x][y];
      if (p < 0.0)
        return {ChannelFault::NegativeEntry,
                "matrix entry (" + std::to_string(x) + "," + std::to_string(y) +
                    ") is negative"};
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      return {ChannelFault::RowSum,
              "matrix row " + std::to_string(x) + " ('" + ch.input_alphabet[x] +
                  "') sums to " + std::to_string(sum)};
  }
  for (std::size_t y = 0; y < ny; ++y) {
    bool reachable = false;
    for (std::size_t x = 0; x < nx && !reachable; ++x) reachable = ch.matrix[x][y] > 0.0;
    if (!reachable)
      return {ChannelFault::UnreachableOutput,
              "output " + std::to_string(y) + " ('" + ch.output_alphabet[y] +
                  "') has zero probability under every input"};
  }
  return {};
}

// One draw from Q(.|x) by inverse CDF over the row; consumes exactly one
// uniform variate, so streams are reproducible from the seed alone.
inline std::uint32_t sample_output(const Channel& ch, std::uint32_t x, Xoshiro256pp& rng) {
  const auto& row = ch.matrix[x];
  const double u = rng.next_double();
  double acc = 0.0;
  std::uint32_t last_positive = 0;
  for (std::uint32_t y = 0; y < row.size(); ++y) {
    if (row[y] <= 0.0) continue;
    acc += row[y];
    last_positive = y;
    if (u < acc) return y;
  }
  return last_positive;  // u fell into the rounding slack at the top of the row
}

// D(Q(.|x) || Q(.|star)) in nats, with 0 ln(0/q) = 0 and p ln(p/0) = +inf.
inline double kl_divergence(const Channel& ch, std::uint32_t x) {
  const auto& p_row = ch.matrix[x];
  const auto& q_row = ch.matrix[ch.star];
  double acc = 0.0;
  for (std::size_t y = 0; y < p_row.size(); ++y) {
    const double p = p_row[y];
    if (p <= 0.0) continue;
    const double q = q_row[y];
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p * std::log(p / q);
  }
  return acc < 0.0 ? 0.0 : acc;  // guard against rounding pushing a true 0 negative
}

struct ThresholdResult {
  double value = 0.0;     // alpha(Q) in nats; +inf is the categorical infinite case
  std::uint32_t x_bar = 0;  // lowest-index maximally divergent input

  bool infinite() const { return std::isinf(value); }
};

// alpha(Q) = max_x D(Q(.|x) || Q(.|star)), ties broken by lowest input index.
inline ThresholdResult sync_threshold(const Channel& ch) {
  ThresholdResult best{kl_divergence(ch, 0), 0};
  for (std::uint32_t x = 1; x < ch.num_inputs(); ++x) {
    const double d = kl_divergence(ch, x);
    if (d > best.value) best = {d, x};
  }
  return best;
}

}  // namespace framesync
