#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "framesync/channel.hpp"
#include "framesync/pattern.hpp"
#include "framesync/typing.hpp"

namespace framesync {

enum class DecoderId { Typicality, SlidingML, BlockML };

inline const char* decoder_name(DecoderId id) {
  switch (id) {
    case DecoderId::Typicality: return "typicality";
    case DecoderId::SlidingML: return "sliding_ml";
    case DecoderId::BlockML: return "block_ml";
  }
  return "?";
}

inline std::optional<DecoderId> decoder_from_name(const std::string& name) {
  if (name == "typicality") return DecoderId::Typicality;
  if (name == "sliding_ml") return DecoderId::SlidingML;
  if (name == "block_ml") return DecoderId::BlockML;
  return std::nullopt;
}

enum class VerdictStatus : std::uint8_t {
  Declared,     // declared_start and stop_time are valid
  NoDetection,  // typicality reached the horizon without stopping
  Skipped,      // ML requested but the sequence exceeds the materialization cap
};

struct Verdict {
  DecoderId decoder = DecoderId::Typicality;
  VerdictStatus status = VerdictStatus::NoDetection;
  std::uint64_t declared_start = 0;  // 1-based; stop_time - N + 1 when declared
  std::uint64_t stop_time = 0;

  bool declared() const { return status == VerdictStatus::Declared; }
  bool operator==(const Verdict&) const = default;
};

struct StreamExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sequential reader over a materialized sequence.
class VectorStream {
 public:
  explicit VectorStream(std::span<const std::uint8_t> data) : data_(data) {}

  std::optional<std::uint8_t> next() {
    if (pos_ >= data_.size()) return std::nullopt;
    return data_[pos_++];
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Sequential typicality rule: slide a length-N window over the stream and
// stop at the first time n >= N whose joint type is within mu of the target
// in every entry. Causality is structural — the verdict at n is fixed before
// symbol n+1 is read.
template <class Stream>
Verdict typicality_decode(const SyncPattern& pattern, const TypicalityTarget& target,
                          Stream& stream, std::uint64_t horizon) {
  SlidingJointType tracker(pattern, target.num_inputs, target.num_outputs);
  JointType type(target.num_inputs, target.num_outputs, pattern.N);
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const auto y = stream.next();
    if (!y)
      throw StreamExhausted("output stream ended at time " + std::to_string(n) +
                            " before horizon " + std::to_string(horizon));
    tracker.push(*y);
    if (n >= pattern.N) {
      tracker.fill_type(type);
      if (within_tolerance(type, target))
        return {DecoderId::Typicality, VerdictStatus::Declared, n - pattern.N + 1, n};
    }
  }
  return {DecoderId::Typicality, VerdictStatus::NoDetection, 0, 0};
}

// Per-symbol log likelihood ratios ln(Q(y|x)/Q(y|star)). Zero probabilities
// make the ratio categorical rather than numeric: an output impossible under
// noise is infinitely strong evidence for the pattern, and an output
// impossible under the hypothesized pattern symbol vetoes the window.
class LogRatioTable {
 public:
  enum Kind : std::int8_t { Finite = 0, PlusInf = 1, MinusInf = -1 };

  explicit LogRatioTable(const Channel& ch)
      : num_outputs_(ch.num_outputs()),
        value_(std::size_t{ch.num_inputs()} * ch.num_outputs(), 0.0),
        kind_(std::size_t{ch.num_inputs()} * ch.num_outputs(), Finite) {
    for (std::uint32_t x = 0; x < ch.num_inputs(); ++x) {
      for (std::uint32_t y = 0; y < num_outputs_; ++y) {
        const double p = ch.q(x, y);
        const double q = ch.q(ch.star, y);
        const std::size_t i = std::size_t{x} * num_outputs_ + y;
        if (p <= 0.0)
          kind_[i] = MinusInf;
        else if (q <= 0.0)
          kind_[i] = PlusInf;
        else
          value_[i] = std::log(p / q);
      }
    }
  }

  Kind kind(std::uint32_t x, std::uint32_t y) const {
    return kind_[std::size_t{x} * num_outputs_ + y];
  }
  double value(std::uint32_t x, std::uint32_t y) const {
    return value_[std::size_t{x} * num_outputs_ + y];
  }

  // Shifts every finite entry; the ML argmax must not care (tested property).
  void add_constant(double c) {
    for (std::size_t i = 0; i < value_.size(); ++i)
      if (kind_[i] == Finite) value_[i] += c;
  }

 private:
  std::uint32_t num_outputs_;
  std::vector<double> value_;
  std::vector<Kind> kind_;
};

// Score of one candidate window. Ordering: any window impossible under the
// pattern hypothesis ranks below everything; otherwise more noise-impossible
// symbols win, then the finite log-ratio sum.
struct WindowScore {
  bool impossible = false;
  std::uint64_t plus_inf = 0;
  double finite = 0.0;
};

inline bool score_better(const WindowScore& a, const WindowScore& b) {
  if (a.impossible != b.impossible) return !a.impossible;
  if (a.impossible) return false;
  if (a.plus_inf != b.plus_inf) return a.plus_inf > b.plus_inf;
  return a.finite > b.finite;
}

inline WindowScore score_window(const LogRatioTable& lr, const SyncPattern& pattern,
                                std::span<const std::uint8_t> seq, std::uint64_t t) {
  WindowScore s;
  for (std::uint32_t k = 0; k < pattern.N; ++k) {
    const std::uint32_t x = pattern.symbols[k];
    const std::uint8_t y = seq[t - 1 + k];
    switch (lr.kind(x, y)) {
      case LogRatioTable::MinusInf: s.impossible = true; return s;
      case LogRatioTable::PlusInf: ++s.plus_inf; break;
      case LogRatioTable::Finite: s.finite += lr.value(x, y); break;
    }
  }
  return s;
}

// Scores for every start t in [1..A]; exposed for the decoder property tests.
inline std::vector<WindowScore> sliding_window_scores(const LogRatioTable& lr,
                                                      const SyncPattern& pattern,
                                                      std::span<const std::uint8_t> seq,
                                                      std::uint64_t A) {
  if (seq.size() < A + pattern.N - 1)
    throw std::invalid_argument("sequence shorter than A + N - 1");
  std::vector<WindowScore> scores(A);
  for (std::uint64_t t = 1; t <= A; ++t) scores[t - 1] = score_window(lr, pattern, seq, t);
  return scores;
}

// Full-observation ML over every start time in [1..A], smallest t on ties.
inline Verdict sliding_ml_decode(const SyncPattern& pattern, const Channel& ch,
                                 std::span<const std::uint8_t> seq, std::uint64_t A) {
  const LogRatioTable lr(ch);
  if (seq.size() < A + pattern.N - 1)
    throw std::invalid_argument("sequence shorter than A + N - 1");
  WindowScore best = score_window(lr, pattern, seq, 1);
  std::uint64_t best_t = 1;
  for (std::uint64_t t = 2; t <= A; ++t) {
    const WindowScore s = score_window(lr, pattern, seq, t);
    if (score_better(s, best)) {
      best = s;
      best_t = t;
    }
  }
  return {DecoderId::SlidingML, VerdictStatus::Declared, best_t, best_t + pattern.N - 1};
}

// Genie-aided ML over the r = floor((A+N-1)/N) disjoint blocks t_i = (i-1)N+1,
// smallest block on ties. Meaningful when trials restrict nu to block starts.
inline Verdict block_ml_decode(const SyncPattern& pattern, const Channel& ch,
                               std::span<const std::uint8_t> seq, std::uint64_t A) {
  const LogRatioTable lr(ch);
  const std::uint64_t len = A + pattern.N - 1;
  if (seq.size() < len)
    throw std::invalid_argument("sequence shorter than A + N - 1");
  const std::uint64_t r = len / pattern.N;
  WindowScore best = score_window(lr, pattern, seq, 1);
  std::uint64_t best_t = 1;
  for (std::uint64_t i = 2; i <= r; ++i) {
    const std::uint64_t t = (i - 1) * pattern.N + 1;
    const WindowScore s = score_window(lr, pattern, seq, t);
    if (score_better(s, best)) {
      best = s;
      best_t = t;
    }
  }
  return {DecoderId::BlockML, VerdictStatus::Declared, best_t, best_t + pattern.N - 1};
}

}  // namespace framesync
