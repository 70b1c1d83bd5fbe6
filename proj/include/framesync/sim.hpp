#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "framesync/channel.hpp"
#include "framesync/decoders.hpp"
#include "framesync/pattern.hpp"
#include "framesync/rng.hpp"
#include "framesync/typing.hpp"

namespace framesync {

inline constexpr std::uint64_t kDefaultMlCap = 1ull << 26;  // ~64 MiB at 1 byte/symbol

enum class NuMode { Uniform, BlockAligned };

// A = max(1, round(e^{alpha N})), saturating once e^{alpha N} leaves the
// exactly-representable integer range.
inline std::uint64_t asynchronism_level(double alpha, std::uint32_t N) {
  const double exponent = alpha * static_cast<double>(N);
  if (exponent >= 42.0) return 1ull << 62;
  const long long rounded = std::llround(std::exp(exponent));
  return rounded < 1 ? 1ull : static_cast<std::uint64_t>(rounded);
}

struct TrialParams {
  double alpha = 0.0;
  double mu = 0.05;
  std::uint64_t seed = 0;
  NuMode nu_mode = NuMode::Uniform;
  std::uint64_t ml_cap = kDefaultMlCap;
};

struct TrialOutcome {
  std::uint64_t nu = 0;
  std::vector<Verdict> verdicts;  // one per requested decoder, same order
  std::uint64_t trial_seed = 0;

  bool operator==(const TrialOutcome&) const = default;
};

namespace detail {

inline std::uint64_t draw_nu(Xoshiro256pp& rng, NuMode mode, std::uint64_t A, std::uint32_t N) {
  if (mode == NuMode::Uniform) return 1 + rng.next_below(A);
  const std::uint64_t blocks = (A - 1) / N + 1;  // block starts 1, N+1, ... within [1..A]
  return 1 + rng.next_below(blocks) * N;
}

inline std::uint32_t input_at(const SyncPattern& p, std::uint64_t nu, std::uint64_t i) {
  if (i < nu || i >= nu + p.N) return p.star;
  return p.symbols[i - nu];
}

}  // namespace detail

// Lazily generates Y_1..Y_length for one trial: noise before nu and after the
// pattern window, pattern-driven inside it. One RNG draw per symbol, in time
// order, so the lazy and materialized paths see the same realization.
class TrialStream {
 public:
  TrialStream(const Channel& ch, const SyncPattern& pattern, std::uint64_t nu,
              std::uint64_t length, Xoshiro256pp rng)
      : ch_(&ch), pattern_(&pattern), nu_(nu), length_(length), rng_(rng) {}

  std::optional<std::uint8_t> next() {
    if (pos_ >= length_) return std::nullopt;
    ++pos_;
    return static_cast<std::uint8_t>(
        sample_output(*ch_, detail::input_at(*pattern_, nu_, pos_), rng_));
  }

 private:
  const Channel* ch_;
  const SyncPattern* pattern_;
  std::uint64_t nu_;
  std::uint64_t length_;
  std::uint64_t pos_ = 0;
  Xoshiro256pp rng_;
};

// One asynchronous trial: draw nu, synthesize the output law, run the
// requested decoders. The typicality decoder streams; ML decoders need the
// materialized sequence and are Skipped when A+N-1 exceeds ml_cap.
inline TrialOutcome run_trial(const Channel& ch, const SyncPattern& pattern,
                              const TrialParams& params,
                              std::span<const DecoderId> decoders) {
  if (ch.num_outputs() > 256)
    throw std::invalid_argument("simulator stores outputs as bytes; at most 256 outputs supported");
  const std::uint64_t A = asynchronism_level(params.alpha, pattern.N);
  const std::uint64_t length = A + pattern.N - 1;

  Xoshiro256pp rng(params.seed);
  const std::uint64_t nu = detail::draw_nu(rng, params.nu_mode, A, pattern.N);

  bool want_ml = false;
  for (DecoderId d : decoders)
    if (d != DecoderId::Typicality) want_ml = true;
  const bool materialize = want_ml && length <= params.ml_cap;

  std::vector<std::uint8_t> seq;
  if (materialize) {
    seq.resize(length);
    for (std::uint64_t i = 1; i <= length; ++i)
      seq[i - 1] = static_cast<std::uint8_t>(
          sample_output(ch, detail::input_at(pattern, nu, i), rng));
  }

  TrialOutcome outcome;
  outcome.nu = nu;
  outcome.trial_seed = params.seed;
  outcome.verdicts.reserve(decoders.size());
  for (DecoderId d : decoders) {
    switch (d) {
      case DecoderId::Typicality: {
        const TypicalityTarget target = make_target(pattern, ch, params.mu);
        if (materialize) {
          VectorStream stream(seq);
          outcome.verdicts.push_back(typicality_decode(pattern, target, stream, length));
        } else {
          TrialStream stream(ch, pattern, nu, length, rng);
          outcome.verdicts.push_back(typicality_decode(pattern, target, stream, length));
        }
        break;
      }
      case DecoderId::SlidingML:
        outcome.verdicts.push_back(
            materialize ? sliding_ml_decode(pattern, ch, seq, A)
                        : Verdict{DecoderId::SlidingML, VerdictStatus::Skipped, 0, 0});
        break;
      case DecoderId::BlockML:
        outcome.verdicts.push_back(
            materialize ? block_ml_decode(pattern, ch, seq, A)
                        : Verdict{DecoderId::BlockML, VerdictStatus::Skipped, 0, 0});
        break;
    }
  }
  return outcome;
}

struct SweepCell {
  std::uint32_t N = 0;
  double alpha = 0.0;
};

struct SweepParams {
  std::uint32_t K = 8;
  double mu = 0.05;
  std::uint32_t trials = 1;
  std::uint64_t seed = 0;
  NuMode nu_mode = NuMode::Uniform;
  std::uint64_t ml_cap = kDefaultMlCap;
  unsigned workers = 1;
  bool record_timings = false;  // off by default so outputs are byte-stable
};

// Aggregates for one (cell, decoder). errors counts every trial whose
// declared start differs from nu; no_detections, early and late split the
// errors by miss direction.
struct SweepRecord {
  std::uint32_t N = 0;
  double alpha = 0.0;
  std::uint64_t A = 0;
  DecoderId decoder = DecoderId::Typicality;
  std::uint32_t trials = 0;
  std::uint32_t errors = 0;
  std::uint32_t no_detections = 0;
  std::uint32_t early = 0;
  std::uint32_t late = 0;
  double error_rate = 0.0;
  double ci95_halfwidth = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;  // master sweep seed

  bool operator==(const SweepRecord&) const = default;
};

namespace detail {

struct TallyCounts {
  std::uint64_t errors = 0, no_detections = 0, early = 0, late = 0;
};

inline void tally(const Verdict& v, std::uint64_t nu, TallyCounts& c) {
  if (v.declared() && v.declared_start == nu) return;
  ++c.errors;
  if (!v.declared())
    ++c.no_detections;
  else if (v.declared_start < nu)
    ++c.early;
  else
    ++c.late;
}

}  // namespace detail

// Monte Carlo over a (N, alpha) grid. Per-trial seeds follow the derive_seed
// chain keyed on (master seed, cell N, cell alpha bits, trial index), so each
// record is a pure function of its cell content — independent of grid order,
// worker count and scheduling. Counts merge by addition; results are
// bit-identical for any `workers`.
inline std::vector<SweepRecord> run_sweep(const Channel& ch,
                                          std::span<const SweepCell> grid,
                                          const SweepParams& params,
                                          std::span<const DecoderId> decoders,
                                          std::vector<std::string>* diagnostics = nullptr) {
  std::vector<SweepRecord> records;
  const unsigned workers = params.workers == 0 ? 1 : params.workers;

  for (const SweepCell& cell : grid) {
    SyncPattern pattern;
    try {
      pattern = build_pattern(ch, cell.N, params.K);
    } catch (const std::exception& e) {
      if (diagnostics)
        diagnostics->push_back("cell N=" + std::to_string(cell.N) + " alpha=" +
                               std::to_string(cell.alpha) + " skipped: " + e.what());
      continue;
    }
    const std::uint64_t A = asynchronism_level(cell.alpha, cell.N);
    const std::uint64_t length = A + cell.N - 1;

    std::vector<DecoderId> runnable;
    for (DecoderId d : decoders) {
      if (d != DecoderId::Typicality && length > params.ml_cap) {
        if (diagnostics)
          diagnostics->push_back("cell N=" + std::to_string(cell.N) + " alpha=" +
                                 std::to_string(cell.alpha) + ": " + decoder_name(d) +
                                 " skipped: A+N-1 = " + std::to_string(length) +
                                 " exceeds cap " + std::to_string(params.ml_cap));
        continue;
      }
      runnable.push_back(d);
    }
    if (runnable.empty()) continue;

    const std::uint64_t cell_key = derive_seed(
        derive_seed(params.seed, cell.N), std::bit_cast<std::uint64_t>(cell.alpha));
    TrialParams tparams;
    tparams.alpha = cell.alpha;
    tparams.mu = params.mu;
    tparams.nu_mode = params.nu_mode;
    tparams.ml_cap = params.ml_cap;

    const auto t0 = std::chrono::steady_clock::now();
    const unsigned nw = std::min<unsigned>(workers, params.trials ? params.trials : 1);
    std::vector<std::vector<detail::TallyCounts>> tallies(
        nw, std::vector<detail::TallyCounts>(runnable.size()));

    auto work = [&](unsigned w) {
      TrialParams local = tparams;
      for (std::uint32_t ti = w; ti < params.trials; ti += nw) {
        local.seed = derive_seed(cell_key, ti);
        const TrialOutcome outcome = run_trial(ch, pattern, local, runnable);
        for (std::size_t d = 0; d < runnable.size(); ++d)
          detail::tally(outcome.verdicts[d], outcome.nu, tallies[w][d]);
      }
    };
    if (nw == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(nw);
      for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (std::size_t d = 0; d < runnable.size(); ++d) {
      detail::TallyCounts total;
      for (unsigned w = 0; w < nw; ++w) {
        total.errors += tallies[w][d].errors;
        total.no_detections += tallies[w][d].no_detections;
        total.early += tallies[w][d].early;
        total.late += tallies[w][d].late;
      }
      SweepRecord rec;
      rec.N = cell.N;
      rec.alpha = cell.alpha;
      rec.A = A;
      rec.decoder = runnable[d];
      rec.trials = params.trials;
      rec.errors = static_cast<std::uint32_t>(total.errors);
      rec.no_detections = static_cast<std::uint32_t>(total.no_detections);
      rec.early = static_cast<std::uint32_t>(total.early);
      rec.late = static_cast<std::uint32_t>(total.late);
      rec.error_rate = params.trials ? static_cast<double>(rec.errors) / params.trials : 0.0;
      rec.ci95_halfwidth =
          params.trials
              ? 1.96 * std::sqrt(rec.error_rate * (1.0 - rec.error_rate) / params.trials)
              : 0.0;
      rec.wall_time_s = params.record_timings ? elapsed : 0.0;
      rec.seed = params.seed;
      records.push_back(rec);
    }
  }
  return records;
}

}  // namespace framesync
