#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "framesync/channel.hpp"
#include "framesync/pattern.hpp"

namespace framesync {

// Joint co-occurrence counts of (pattern symbol, output symbol) over a
// length-N window. Total count is N once the window is full.
struct JointType {
  std::uint32_t num_inputs = 0;
  std::uint32_t num_outputs = 0;
  std::uint32_t N = 0;
  std::vector<std::uint32_t> counts;  // row-major, x * num_outputs + y

  JointType() = default;
  JointType(std::uint32_t nx, std::uint32_t ny, std::uint32_t n)
      : num_inputs(nx), num_outputs(ny), N(n), counts(std::size_t{nx} * ny, 0) {}

  std::uint32_t& at(std::uint32_t x, std::uint32_t y) {
    return counts[std::size_t{x} * num_outputs + y];
  }
  std::uint32_t at(std::uint32_t x, std::uint32_t y) const {
    return counts[std::size_t{x} * num_outputs + y];
  }

  bool operator==(const JointType&) const = default;
};

// Joint type of one explicit window (position k of the window pairs with
// pattern symbol s_{k+1}). The from-scratch reference for the sliding tracker.
inline JointType joint_type_of(const SyncPattern& p, std::uint32_t num_inputs,
                               std::uint32_t num_outputs,
                               std::span<const std::uint8_t> window) {
  if (window.size() != p.N)
    throw std::invalid_argument("window length does not match pattern length");
  JointType t(num_inputs, num_outputs, p.N);
  for (std::uint32_t k = 0; k < p.N; ++k) ++t.at(p.symbols[k], window[k]);
  return t;
}

// Target joint distribution P(x,y) = Phat_s(x) Q(y|x) plus the typicality
// tolerance mu. Rows of inputs absent from the pattern are all zero.
struct TypicalityTarget {
  std::uint32_t num_inputs = 0;
  std::uint32_t num_outputs = 0;
  double mu = 0.0;
  std::vector<double> p;  // row-major

  double at(std::uint32_t x, std::uint32_t y) const {
    return p[std::size_t{x} * num_outputs + y];
  }
};

inline TypicalityTarget make_target(const SyncPattern& pattern, const Channel& ch, double mu) {
  TypicalityTarget t;
  t.num_inputs = ch.num_inputs();
  t.num_outputs = ch.num_outputs();
  t.mu = mu;
  t.p.assign(std::size_t{t.num_inputs} * t.num_outputs, 0.0);
  std::vector<std::uint32_t> symbol_count(t.num_inputs, 0);
  for (std::uint32_t sym : pattern.symbols) ++symbol_count[sym];
  for (std::uint32_t x = 0; x < t.num_inputs; ++x) {
    if (symbol_count[x] == 0) continue;
    const double marginal = static_cast<double>(symbol_count[x]) / pattern.N;
    for (std::uint32_t y = 0; y < t.num_outputs; ++y)
      t.p[std::size_t{x} * t.num_outputs + y] = marginal * ch.q(x, y);
  }
  return t;
}

// |Phat(x,y) - P(x,y)| <= mu for every entry.
inline bool within_tolerance(const JointType& type, const TypicalityTarget& target) {
  const double n = static_cast<double>(type.N);
  for (std::uint32_t x = 0; x < target.num_inputs; ++x) {
    for (std::uint32_t y = 0; y < target.num_outputs; ++y) {
      const double phat = (x < type.num_inputs && y < type.num_outputs)
                              ? static_cast<double>(type.at(x, y)) / n
                              : 0.0;
      if (std::abs(phat - target.at(x, y)) > target.mu) return false;
    }
  }
  return true;
}

// Maintains the joint type of the trailing length-N window of an output
// stream against a two-symbol pattern. A slide realigns the pattern side of
// every retained output, so the star row is rebuilt from the ring buffer on
// each query (O(star count)); the x_bar row is the window histogram minus it.
class SlidingJointType {
 public:
  SlidingJointType(const SyncPattern& pattern, std::uint32_t num_inputs,
                   std::uint32_t num_outputs)
      : pattern_(&pattern),
        histogram_(num_outputs, 0),
        star_row_(num_outputs, 0),
        ring_(pattern.N, 0),
        num_inputs_(num_inputs) {
    if (pattern.star_count() > 0 && pattern.x_bar == pattern.star)
      throw std::invalid_argument("pattern star symbol equals x_bar");
    for (std::uint32_t sym : pattern.symbols)
      if (sym != pattern.x_bar && sym != pattern.star)
        throw std::invalid_argument("sliding type tracker requires a two-symbol pattern");
  }

  void push(std::uint8_t y) {
    const std::uint32_t slot = static_cast<std::uint32_t>(pushed_ % ring_.size());
    if (pushed_ >= ring_.size()) --histogram_[ring_[slot]];
    ring_[slot] = y;
    ++histogram_[y];
    ++pushed_;
  }

  bool full() const { return pushed_ >= ring_.size(); }
  std::uint64_t pushed() const { return pushed_; }

  // Joint type of the current window; valid once full().
  void fill_type(JointType& out) const {
    const std::uint32_t N = pattern_->N;
    const std::uint32_t ny = static_cast<std::uint32_t>(histogram_.size());
    if (out.num_inputs != num_inputs_ || out.num_outputs != ny || out.N != N)
      out = JointType(num_inputs_, ny, N);
    else
      std::fill(out.counts.begin(), out.counts.end(), 0);
    for (std::uint32_t& c : star_row_) c = 0;
    // Pattern position g (1-based) is aligned with the output pushed at
    // step pushed_ - N + g, which lives in ring slot (pushed_ - N + g - 1) mod N.
    for (std::uint32_t g : pattern_->star_positions)
      ++star_row_[ring_[(pushed_ - N + g - 1) % N]];
    for (std::uint32_t y = 0; y < ny; ++y) {
      out.at(pattern_->star, y) = star_row_[y];
      out.at(pattern_->x_bar, y) = histogram_[y] - star_row_[y];
    }
  }

 private:
  const SyncPattern* pattern_;
  std::vector<std::uint32_t> histogram_;
  mutable std::vector<std::uint32_t> star_row_;
  std::vector<std::uint8_t> ring_;
  std::uint64_t pushed_ = 0;
  std::uint32_t num_inputs_ = 0;
};

}  // namespace framesync
