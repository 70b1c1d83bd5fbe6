#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "framesync/io.hpp"
#include "framesync/sim.hpp"

using namespace framesync;

namespace {

const std::vector<DecoderId> kAll{DecoderId::Typicality, DecoderId::SlidingML,
                                  DecoderId::BlockML};
const std::vector<DecoderId> kTypOnly{DecoderId::Typicality};

Channel noiseless_binary() {
  Channel ch;
  ch.input_alphabet = {"0", "1"};
  ch.output_alphabet = {"0", "1"};
  ch.star = 0;
  ch.matrix = {{1.0, 0.0}, {0.0, 1.0}};
  return ch;
}

}  // namespace

TEST_CASE("asynchronism level") {
  REQUIRE(asynchronism_level(0.0, 40) == 1);
  REQUIRE(asynchronism_level(0.04, 40) == 5);    // e^1.6 = 4.953
  REQUIRE(asynchronism_level(0.04, 80) == 25);   // e^3.2 = 24.53
  REQUIRE(asynchronism_level(0.04, 160) == 602); // e^6.4 = 601.8
  REQUIRE(asynchronism_level(0.15, 120) == 65659969);
  REQUIRE(asynchronism_level(2.0, 1000) == (1ull << 62));
}

TEST_CASE("no asynchronism means every decoder succeeds on a clean channel") {
  const Channel ch = noiseless_binary();
  const SyncPattern p = build_pattern(ch, 12, 3, /*allow_infinite=*/true);
  TrialParams params;
  params.alpha = 0.0;
  params.mu = 0.05;
  for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
    params.seed = seed;
    const TrialOutcome o = run_trial(ch, p, params, kAll);
    REQUIRE(o.nu == 1);
    for (const Verdict& v : o.verdicts) {
      REQUIRE(v.declared());
      REQUIRE(v.declared_start == 1);
    }
  }
}

TEST_CASE("trials are reproducible from the seed") {
  const Channel ch = make_bsc(0.3);
  const SyncPattern p = build_pattern(ch, 20, 4);
  TrialParams params;
  params.alpha = 0.1;
  params.seed = 777;
  const TrialOutcome a = run_trial(ch, p, params, kAll);
  const TrialOutcome b = run_trial(ch, p, params, kAll);
  REQUIRE(a == b);
}

TEST_CASE("typicality verdict is the same on the lazy and materialized paths") {
  const Channel ch = make_bsc(0.2);
  const SyncPattern p = build_pattern(ch, 16, 4);
  TrialParams params;
  params.alpha = 0.15;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    params.seed = derive_seed(4242, seed);
    const TrialOutcome lazy = run_trial(ch, p, params, kTypOnly);
    const TrialOutcome both =
        run_trial(ch, p, params, std::vector<DecoderId>{DecoderId::Typicality,
                                                        DecoderId::SlidingML});
    REQUIRE(lazy.nu == both.nu);
    REQUIRE(lazy.verdicts[0] == both.verdicts[0]);
  }
}

TEST_CASE("ML beyond the cap is skipped, typicality still runs") {
  const Channel ch = make_bsc(0.2);
  const SyncPattern p = build_pattern(ch, 16, 4);
  TrialParams params;
  params.alpha = 0.15;
  params.seed = 5;
  params.ml_cap = 4;
  const TrialOutcome o = run_trial(ch, p, params, kAll);
  REQUIRE((o.verdicts[0].declared() ||
           o.verdicts[0].status == VerdictStatus::NoDetection));
  REQUIRE(o.verdicts[1].status == VerdictStatus::Skipped);
  REQUIRE(o.verdicts[2].status == VerdictStatus::Skipped);
}

TEST_CASE("nu is uniform over [1..A]") {
  const Channel ch = make_bsc(0.2);
  const SyncPattern p = build_pattern(ch, 12, 3);
  const double alpha = std::log(8.0) / 12.0;
  REQUIRE(asynchronism_level(alpha, 12) == 8);
  TrialParams params;
  params.alpha = alpha;
  std::vector<int> hist(8, 0);
  const int trials = 100'000;
  for (int t = 0; t < trials; ++t) {
    params.seed = derive_seed(99, t);
    const TrialOutcome o = run_trial(ch, p, params, kTypOnly);
    REQUIRE(o.nu >= 1);
    REQUIRE(o.nu <= 8);
    ++hist[o.nu - 1];
  }
  const double expect = trials / 8.0;
  const double sigma = std::sqrt(trials * (1.0 / 8.0) * (7.0 / 8.0));
  for (int c : hist) REQUIRE(std::abs(c - expect) < 5 * sigma);
}

TEST_CASE("block-aligned nu lands on block starts") {
  const Channel ch = make_bsc(0.2);
  const SyncPattern p = build_pattern(ch, 12, 3);
  TrialParams params;
  params.alpha = 0.3;  // A = 37
  params.nu_mode = NuMode::BlockAligned;
  const std::uint64_t A = asynchronism_level(params.alpha, 12);
  for (int t = 0; t < 3000; ++t) {
    params.seed = derive_seed(7, t);
    const TrialOutcome o = run_trial(ch, p, params, kTypOnly);
    REQUIRE(o.nu <= A);
    REQUIRE((o.nu - 1) % p.N == 0);
  }
}

TEST_CASE("single-cell sweep with one trial emits one record per decoder") {
  const Channel ch = make_bsc(0.2);
  const std::vector<SweepCell> grid{{16, 0.1}};
  SweepParams params;
  params.K = 4;
  params.trials = 1;
  params.seed = 3;
  const auto records = run_sweep(ch, grid, params, kAll);
  REQUIRE(records.size() == 3);
  for (const auto& r : records) {
    REQUIRE(r.trials == 1);
    REQUIRE(r.errors <= 1);
    REQUIRE(r.no_detections <= r.errors);
  }
}

TEST_CASE("sweep records are independent of grid order") {
  const Channel ch = make_bsc(0.3);
  SweepParams params;
  params.K = 4;
  params.trials = 60;
  params.seed = 12;
  const std::vector<SweepCell> grid1{{16, 0.05}, {24, 0.1}, {16, 0.1}};
  const std::vector<SweepCell> grid2{{16, 0.1}, {16, 0.05}, {24, 0.1}};
  const auto r1 = run_sweep(ch, grid1, params, kTypOnly);
  const auto r2 = run_sweep(ch, grid2, params, kTypOnly);
  REQUIRE(r1.size() == 3);
  REQUIRE(r2.size() == 3);
  for (const auto& a : r1) {
    const auto match = std::find_if(r2.begin(), r2.end(), [&](const SweepRecord& b) {
      return a.N == b.N && a.alpha == b.alpha && a.decoder == b.decoder;
    });
    REQUIRE(match != r2.end());
    REQUIRE(a == *match);
  }
}

TEST_CASE("worker count never changes sweep results") {
  const Channel ch = make_bsc(0.35);
  const std::vector<SweepCell> grid{{16, 0.1}, {20, 0.05}};
  SweepParams one;
  one.K = 4;
  one.trials = 80;
  one.seed = 9;
  SweepParams four = one;
  four.workers = 4;
  const auto r1 = run_sweep(ch, grid, one, kAll);
  const auto r4 = run_sweep(ch, grid, four, kAll);
  REQUIRE(r1 == r4);
}

TEST_CASE("cells that cannot build a pattern are skipped with a diagnostic") {
  const Channel ch = make_bsc(0.2);
  const std::vector<SweepCell> grid{{6, 0.1}, {16, 0.1}};
  SweepParams params;
  params.K = 3;
  params.trials = 5;
  std::vector<std::string> diagnostics;
  const auto records = run_sweep(ch, grid, params, kTypOnly, &diagnostics);
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].N == 16);
  REQUIRE(diagnostics.size() == 1);
  REQUIRE_THAT(diagnostics[0], Catch::Matchers::ContainsSubstring("skipped"));
}

TEST_CASE("sweep error accounting matches a trial-by-trial replay") {
  const Channel ch = make_bsc(0.3);
  const std::vector<SweepCell> grid{{16, 0.12}};
  SweepParams params;
  params.K = 4;
  params.trials = 150;
  params.seed = 31;
  params.workers = 2;
  const std::vector<DecoderId> decoders{DecoderId::Typicality, DecoderId::SlidingML};
  const auto records = run_sweep(ch, grid, params, decoders);
  REQUIRE(records.size() == 2);

  // replay with the documented seed rule
  const SyncPattern p = build_pattern(ch, 16, 4);
  const std::uint64_t cell_key =
      derive_seed(derive_seed(params.seed, 16), std::bit_cast<std::uint64_t>(0.12));
  std::vector<std::uint32_t> errors(2, 0), nodet(2, 0);
  for (std::uint32_t ti = 0; ti < params.trials; ++ti) {
    TrialParams tp;
    tp.alpha = 0.12;
    tp.mu = params.mu;
    tp.seed = derive_seed(cell_key, ti);
    const TrialOutcome o = run_trial(ch, p, tp, decoders);
    for (int d = 0; d < 2; ++d) {
      const Verdict& v = o.verdicts[d];
      if (!(v.declared() && v.declared_start == o.nu)) ++errors[d];
      if (v.status == VerdictStatus::NoDetection) ++nodet[d];
    }
  }
  for (int d = 0; d < 2; ++d) {
    REQUIRE(records[d].errors == errors[d]);
    REQUIRE(records[d].no_detections == nodet[d]);
    REQUIRE(records[d].errors == records[d].no_detections + records[d].early + records[d].late);
    REQUIRE(records[d].error_rate * records[d].trials ==
            static_cast<double>(records[d].errors));
  }
}

TEST_CASE("Monte Carlo regression: BSC(0.4), N=40, alpha=0.04 typicality cell") {
  // Frozen counts recorded from this sweep's first run under seed 1.
  const Channel ch = make_bsc(0.4);
  const std::vector<SweepCell> grid{{40, 0.04}};
  SweepParams params;
  params.K = 8;
  params.mu = 0.05;
  params.trials = 2000;
  params.seed = 1;
  params.workers = 2;
  const auto records = run_sweep(ch, grid, params, kTypOnly);
  REQUIRE(records.size() == 1);
  CHECK(records[0].errors == 1697);
  CHECK(records[0].no_detections == 518);
  CHECK(records[0].errors ==
        records[0].no_detections + records[0].early + records[0].late);
}
