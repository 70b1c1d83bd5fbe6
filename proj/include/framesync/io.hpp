#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "framesync/channel.hpp"
#include "framesync/sim.hpp"

namespace framesync {

struct ChannelConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Channel config schema (JSON object):
//   input_alphabet : array of distinct strings
//   output_alphabet: array of distinct strings
//   star           : string, must appear in input_alphabet
//   matrix         : array of |input| rows, each an array of |output| numbers;
//                    row x, column y is Q(y|x) in alphabet order
inline Channel parse_channel_json(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ChannelConfigError(origin + ": not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ChannelConfigError(origin + ": top level must be an object");

  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key))
      throw ChannelConfigError(origin + ": missing key '" + key + "'");
    return doc.at(key);
  };
  auto string_list = [&](const char* key) {
    const auto& node = require(key);
    if (!node.is_array() || node.empty())
      throw ChannelConfigError(origin + ": key '" + std::string(key) +
                               "' must be a nonempty array of strings");
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : node) {
      if (!item.is_string())
        throw ChannelConfigError(origin + ": key '" + std::string(key) +
                                 "' must contain only strings");
      const auto s = item.get<std::string>();
      if (!seen.insert(s).second)
        throw ChannelConfigError(origin + ": key '" + std::string(key) +
                                 "' has duplicate symbol \"" + s + "\"");
      out.push_back(s);
    }
    return out;
  };

  Channel ch;
  ch.input_alphabet = string_list("input_alphabet");
  ch.output_alphabet = string_list("output_alphabet");

  const auto& star_node = require("star");
  if (!star_node.is_string())
    throw ChannelConfigError(origin + ": key 'star' must be a string");
  const auto star_label = star_node.get<std::string>();
  bool star_found = false;
  for (std::size_t x = 0; x < ch.input_alphabet.size(); ++x) {
    if (ch.input_alphabet[x] == star_label) {
      ch.star = static_cast<std::uint32_t>(x);
      star_found = true;
      break;
    }
  }
  if (!star_found)
    throw ChannelConfigError(origin + ": key 'star': symbol \"" + star_label +
                             "\" not in input_alphabet");

  const auto& matrix_node = require("matrix");
  if (!matrix_node.is_array())
    throw ChannelConfigError(origin + ": key 'matrix' must be an array of rows");
  for (const auto& row : matrix_node) {
    if (!row.is_array())
      throw ChannelConfigError(origin + ": key 'matrix' rows must be arrays");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number())
        throw ChannelConfigError(origin + ": key 'matrix' entries must be numbers");
      r.push_back(v.get<double>());
    }
    ch.matrix.push_back(std::move(r));
  }

  const ValidationResult vr = validate(ch);
  if (!vr.ok()) throw ChannelConfigError(origin + ": key 'matrix': " + vr.detail);
  return ch;
}

inline Channel load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ChannelConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_channel_json(buf.str(), path);
}

// Binary symmetric channel with crossover p; alphabets {"0","1"}, star "0".
inline Channel make_bsc(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("BSC crossover probability must be in [0,1]");
  Channel ch;
  ch.input_alphabet = {"0", "1"};
  ch.output_alphabet = {"0", "1"};
  ch.star = 0;
  ch.matrix = {{1.0 - p, p}, {p, 1.0 - p}};
  return ch;
}

namespace detail {

inline std::string fmt_double(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace detail

inline std::string fmt_alpha(double alpha) { return detail::fmt_double(alpha, "%.10g"); }
inline std::string fmt_rate(double rate) { return detail::fmt_double(rate, "%.6f"); }
inline std::string fmt_seconds(double s) { return detail::fmt_double(s, "%.3f"); }

inline constexpr const char* kSweepCsvHeader =
    "N,alpha,A,decoder,trials,errors,no_detections,error_rate,ci95_halfwidth,wall_time_s,seed";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRecord& r : records) {
    out << r.N << ',' << fmt_alpha(r.alpha) << ',' << r.A << ',' << decoder_name(r.decoder)
        << ',' << r.trials << ',' << r.errors << ',' << r.no_detections << ','
        << fmt_rate(r.error_rate) << ',' << fmt_rate(r.ci95_halfwidth) << ','
        << fmt_seconds(r.wall_time_s) << ',' << r.seed << '\n';
  }
}

inline void write_sweep_json(std::ostream& out, const std::vector<SweepRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRecord& r : records) {
    arr.push_back({{"N", r.N},
                   {"alpha", r.alpha},
                   {"A", r.A},
                   {"decoder", decoder_name(r.decoder)},
                   {"trials", r.trials},
                   {"errors", r.errors},
                   {"no_detections", r.no_detections},
                   {"error_rate", r.error_rate},
                   {"ci95_halfwidth", r.ci95_halfwidth},
                   {"wall_time_s", r.wall_time_s},
                   {"seed", r.seed}});
  }
  out << arr.dump(2) << '\n';
}

}  // namespace framesync
