// Command-line front end: threshold computation, pattern inspection, single
// trials and Monte Carlo sweeps. Exit codes: 0 success, 2 configuration or
// validation error, 3 resource-cap refusal.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framesync/channel.hpp"
#include "framesync/decoders.hpp"
#include "framesync/io.hpp"
#include "framesync/pattern.hpp"
#include "framesync/sim.hpp"

namespace {

using namespace framesync;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCap = 3;

struct ChannelOpts {
  std::string path;
  double bsc_p = -1.0;

  void attach(CLI::App* cmd) {
    auto* file = cmd->add_option("--channel", path, "channel config file (JSON)");
    auto* bsc = cmd->add_option("--bsc", bsc_p, "binary symmetric channel with crossover p");
    file->excludes(bsc);
    bsc->excludes(file);
  }

  bool selected() const { return !path.empty() || bsc_p >= 0.0; }
  std::string describe() const {
    return path.empty() ? "bsc:" + fmt_alpha(bsc_p) : path;
  }
  Channel load() const {
    if (!selected())
      throw ChannelConfigError("no channel given; use --channel FILE or --bsc P");
    return path.empty() ? make_bsc(bsc_p) : load_channel(path);
  }
};

std::string fmt_div(double v) {
  if (std::isinf(v)) return "infinite";
  return detail::fmt_double(v, "%.12g");
}

std::vector<DecoderId> parse_decoders(const std::vector<std::string>& names) {
  std::vector<DecoderId> out;
  for (const std::string& n : names) {
    const auto id = decoder_from_name(n);
    if (!id)
      throw std::invalid_argument("unknown decoder '" + n +
                                  "' (expected typicality, sliding_ml or block_ml)");
    out.push_back(*id);
  }
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s.push_back(sep);
    s += items[i];
  }
  return s;
}

NuMode parse_nu_mode(const std::string& name) {
  if (name == "uniform") return NuMode::Uniform;
  if (name == "block") return NuMode::BlockAligned;
  throw std::invalid_argument("unknown nu mode '" + name + "' (expected uniform or block)");
}

int cmd_threshold(const ChannelOpts& copts) {
  const Channel ch = copts.load();
  std::cout << "config: subcommand=threshold channel=" << copts.describe() << "\n";
  for (std::uint32_t x = 0; x < ch.num_inputs(); ++x) {
    std::cout << "input " << x << " \"" << ch.input_alphabet[x] << "\"";
    if (x == ch.star) std::cout << " (star)";
    std::cout << ": D = " << fmt_div(kl_divergence(ch, x)) << "\n";
  }
  const ThresholdResult thr = sync_threshold(ch);
  std::cout << "threshold: " << fmt_div(thr.value) << (thr.infinite() ? "" : " nats") << "\n";
  std::cout << "x_bar: \"" << ch.input_alphabet[thr.x_bar] << "\" (index " << thr.x_bar
            << ")\n";
  if (thr.value == 0.0)
    std::cout << "warning: threshold is 0; every input is distributed like noise and no "
                 "positive asynchronism exponent is achievable\n";
  return kExitOk;
}

int cmd_pattern(const ChannelOpts& copts, std::uint32_t N, std::uint32_t K) {
  const Channel ch = copts.load();
  std::cout << "config: subcommand=pattern channel=" << copts.describe() << " N=" << N
            << " K=" << K << "\n";
  const ThresholdResult thr = sync_threshold(ch);
  if (thr.infinite())
    std::cerr << "note: threshold is infinite; pattern detection is trivially reliable\n";
  const SyncPattern p = build_pattern(ch, N, K, /*allow_infinite=*/true);
  const ShiftDistance d = min_shift_distance(p);
  std::cout << "pattern: " << pattern_string(p) << "\n";
  std::cout << "N=" << p.N << " K=" << p.K << " m=" << p.m << " stars=" << p.star_count()
            << " star_fraction=" << fmt_rate(static_cast<double>(p.star_count()) / p.N)
            << "\n";
  std::cout << "min_shift_distance=" << d.distance << " at_shift=" << d.shift << "\n";
  return kExitOk;
}

struct TrialOpts {
  std::uint32_t N = 0, K = 0;
  double alpha = 0.0, mu = 0.05;
  std::uint64_t seed = 0, ml_cap = kDefaultMlCap;
  std::vector<std::string> decoder_names{"typicality", "sliding_ml"};
  std::string nu_mode = "uniform";
};

int cmd_trial(const ChannelOpts& copts, const TrialOpts& opts) {
  const Channel ch = copts.load();
  const std::vector<DecoderId> decoders = parse_decoders(opts.decoder_names);
  std::cout << "config: subcommand=trial channel=" << copts.describe() << " N=" << opts.N
            << " K=" << opts.K << " alpha=" << fmt_alpha(opts.alpha) << " mu="
            << fmt_alpha(opts.mu) << " seed=" << opts.seed << " decoders="
            << join(opts.decoder_names, ',') << " nu_mode=" << opts.nu_mode << " ml_cap="
            << opts.ml_cap << "\n";

  const SyncPattern pattern = build_pattern(ch, opts.N, opts.K, /*allow_infinite=*/true);
  const std::uint64_t A = asynchronism_level(opts.alpha, opts.N);
  const std::uint64_t length = A + opts.N - 1;
  bool want_ml = false;
  for (DecoderId d : decoders)
    if (d != DecoderId::Typicality) want_ml = true;
  if (want_ml && length > opts.ml_cap) {
    std::cerr << "error: sequence length A+N-1 = " << length << " exceeds --ml-cap "
              << opts.ml_cap << " for maximum-likelihood decoding; rerun with --decoders "
                 "typicality\n";
    return kExitCap;
  }

  TrialParams params;
  params.alpha = opts.alpha;
  params.mu = opts.mu;
  params.seed = opts.seed;
  params.nu_mode = parse_nu_mode(opts.nu_mode);
  params.ml_cap = opts.ml_cap;
  const TrialOutcome outcome = run_trial(ch, pattern, params, decoders);

  std::cout << "A: " << A << " (horizon " << length << ")\n";
  std::cout << "nu: " << outcome.nu << "\n";
  for (const Verdict& v : outcome.verdicts) {
    std::cout << decoder_name(v.decoder) << ": ";
    if (v.declared())
      std::cout << "declared_start=" << v.declared_start << " stop_time=" << v.stop_time
                << " success=" << (v.declared_start == outcome.nu ? "yes" : "no");
    else if (v.status == VerdictStatus::NoDetection)
      std::cout << "no_detection success=no";
    else
      std::cout << "skipped";
    std::cout << "\n";
  }
  return kExitOk;
}

struct SweepOpts {
  std::vector<std::uint32_t> N_list;
  std::vector<double> alpha_list;
  std::uint32_t K = 8, trials = 0;
  double mu = 0.05;
  std::uint64_t seed = 0, ml_cap = kDefaultMlCap;
  std::vector<std::string> decoder_names{"typicality"};
  std::string nu_mode = "uniform";
  unsigned workers = 1;
  bool timings = false;
  std::string output;
  bool json = false;
};

std::string json_mirror_path(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

int cmd_sweep(const ChannelOpts& copts, const SweepOpts& opts) {
  const Channel ch = copts.load();
  const std::vector<DecoderId> decoders = parse_decoders(opts.decoder_names);

  std::vector<std::string> n_strs, a_strs;
  for (auto n : opts.N_list) n_strs.push_back(std::to_string(n));
  for (auto a : opts.alpha_list) a_strs.push_back(fmt_alpha(a));
  std::cout << "config: subcommand=sweep channel=" << copts.describe() << " N="
            << join(n_strs, ',') << " alpha=" << join(a_strs, ',') << " K=" << opts.K
            << " mu=" << fmt_alpha(opts.mu) << " trials=" << opts.trials << " seed="
            << opts.seed << " decoders=" << join(opts.decoder_names, ',') << " nu_mode="
            << opts.nu_mode << " ml_cap=" << opts.ml_cap << " workers=" << opts.workers
            << " timings=" << (opts.timings ? 1 : 0) << " output=" << opts.output
            << " json=" << (opts.json ? 1 : 0) << "\n";

  std::vector<SweepCell> grid;
  for (std::uint32_t n : opts.N_list)
    for (double a : opts.alpha_list) grid.push_back({n, a});

  SweepParams params;
  params.K = opts.K;
  params.mu = opts.mu;
  params.trials = opts.trials;
  params.seed = opts.seed;
  params.nu_mode = parse_nu_mode(opts.nu_mode);
  params.ml_cap = opts.ml_cap;
  params.workers = opts.workers;
  params.record_timings = opts.timings;

  std::vector<std::string> diagnostics;
  const std::vector<SweepRecord> records = run_sweep(ch, grid, params, decoders, &diagnostics);
  for (const std::string& line : diagnostics) std::cerr << "skip: " << line << "\n";

  for (const SweepRecord& r : records) {
    std::cout << "N=" << r.N << " alpha=" << fmt_alpha(r.alpha) << " A=" << r.A
              << " decoder=" << decoder_name(r.decoder) << " trials=" << r.trials
              << " errors=" << r.errors << " no_detect=" << r.no_detections << " early="
              << r.early << " late=" << r.late << " error_rate=" << fmt_rate(r.error_rate)
              << " ci95=" << fmt_rate(r.ci95_halfwidth);
    if (opts.timings) std::cout << " wall_s=" << fmt_seconds(r.wall_time_s);
    std::cout << "\n";
  }

  std::ofstream csv(opts.output);
  if (!csv) {
    std::cerr << "error: cannot write output file '" << opts.output << "'\n";
    return kExitConfig;
  }
  write_sweep_csv(csv, records);
  std::cerr << "wrote " << opts.output << "\n";
  if (opts.json) {
    const std::string jpath = json_mirror_path(opts.output);
    std::ofstream js(jpath);
    if (!js) {
      std::cerr << "error: cannot write output file '" << jpath << "'\n";
      return kExitConfig;
    }
    write_sweep_json(js, records);
    std::cerr << "wrote " << jpath << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-shot frame synchronization simulator"};
  app.require_subcommand(1);

  ChannelOpts thr_ch, pat_ch, tri_ch, swp_ch;

  auto* thr = app.add_subcommand("threshold", "per-input divergences and the sync threshold");
  thr_ch.attach(thr);

  auto* pat = app.add_subcommand("pattern", "construct and inspect a sync pattern");
  pat_ch.attach(pat);
  std::uint32_t pat_N = 0, pat_K = 0;
  pat->add_option("--N", pat_N, "pattern length")->required();
  pat->add_option("--K", pat_K, "star grid period")->required();

  auto* tri = app.add_subcommand("trial", "run one asynchronous trial");
  tri_ch.attach(tri);
  TrialOpts topts;
  tri->add_option("--N", topts.N, "pattern length")->required();
  tri->add_option("--K", topts.K, "star grid period")->required();
  tri->add_option("--alpha", topts.alpha, "asynchronism exponent (nats)")->required();
  tri->add_option("--mu", topts.mu, "typicality tolerance");
  tri->add_option("--seed", topts.seed, "64-bit seed");
  tri->add_option("--decoders", topts.decoder_names, "decoders to run")->delimiter(',');
  tri->add_option("--nu-mode", topts.nu_mode, "nu law: uniform or block");
  tri->add_option("--ml-cap", topts.ml_cap, "max materialized symbols for ML decoders");

  auto* swp = app.add_subcommand("sweep", "Monte Carlo sweep over an (N, alpha) grid");
  swp_ch.attach(swp);
  SweepOpts sopts;
  swp->add_option("--N", sopts.N_list, "pattern lengths")->required()->delimiter(',');
  swp->add_option("--alpha", sopts.alpha_list, "asynchronism exponents (nats)")
      ->required()
      ->delimiter(',');
  swp->add_option("--K", sopts.K, "star grid period");
  swp->add_option("--mu", sopts.mu, "typicality tolerance");
  swp->add_option("--trials", sopts.trials, "trials per cell")->required();
  swp->add_option("--seed", sopts.seed, "64-bit master seed");
  swp->add_option("--decoders", sopts.decoder_names, "decoders to run")->delimiter(',');
  swp->add_option("--nu-mode", sopts.nu_mode, "nu law: uniform or block");
  swp->add_option("--ml-cap", sopts.ml_cap, "max materialized symbols for ML decoders");
  swp->add_option("--workers", sopts.workers, "worker threads (never changes results)");
  swp->add_flag("--timings", sopts.timings, "record wall times in outputs");
  swp->add_option("--output", sopts.output, "CSV output path")->required();
  swp->add_flag("--json", sopts.json, "also write a JSON mirror next to the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (thr->parsed()) return cmd_threshold(thr_ch);
    if (pat->parsed()) return cmd_pattern(pat_ch, pat_N, pat_K);
    if (tri->parsed()) return cmd_trial(tri_ch, topts);
    if (swp->parsed()) return cmd_sweep(swp_ch, sopts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
