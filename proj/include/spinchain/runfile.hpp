// Copyright 2026 The spinchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINCHAIN_RUNFILE_HPP
#define SPINCHAIN_RUNFILE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinchain/chain.hpp"
#include "spinchain/sector.hpp"

namespace spinchain {

/// Configuration-file problem: carries the offending key path so messages
/// point at the exact spot in the document.
class RunFileError : public std::runtime_error {
 public:
  explicit RunFileError(const std::string &what) : std::runtime_error(what) {}
};

struct RunFile {
  RunConfig config;
  std::filesystem::path output_dir = "out";
  nlohmann::json source;  // parsed document, echoed into run_meta.json
};

namespace runfile_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string &where, const std::string &what) {
  throw RunFileError(where + ": " + what);
}

inline void reject_unknown_keys(const json &object, const std::string &where,
                                std::initializer_list<const char *> known) {
  for (const auto &item : object.items()) {
    bool ok = false;
    for (const char *k : known) {
      if (item.key() == k) ok = true;
    }
    if (!ok) fail(where + "." + item.key(), "unknown key");
  }
}

inline const json &require_key(const json &object, const std::string &where, const char *key) {
  auto it = object.find(key);
  if (it == object.end()) fail(where, std::string("missing required key '") + key + "'");
  return *it;
}

inline double require_number(const json &object, const std::string &where, const char *key) {
  const json &v = require_key(object, where, key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

inline std::int64_t require_integer(const json &object, const std::string &where, const char *key) {
  const json &v = require_key(object, where, key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::string require_string(const json &object, const std::string &where, const char *key) {
  const json &v = require_key(object, where, key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

/// Distribution CSV: header "m_doubled,probability", one row per sector.
/// Rows may be sparse (missing sectors read as zero) but never duplicated.
inline SectorDistribution read_distribution_csv(const std::filesystem::path &path, int n) {
  std::ifstream in(path);
  if (!in) throw RunFileError("cannot open distribution file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("m_doubled,probability", 0) != 0) {
    throw RunFileError(path.string() + ": expected header 'm_doubled,probability'");
  }
  std::vector<double> probs(static_cast<std::size_t>(sector_count(n)), 0.0);
  std::vector<bool> seen(probs.size(), false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    int d = 0;
    double p = 0.0;
    try {
      d = std::stoi(field);
      std::getline(row, field, ',');
      p = std::stod(field);
    } catch (const std::exception &) {
      throw RunFileError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    std::size_t idx;
    try {
      idx = static_cast<std::size_t>(index_from_doubled(n, d));
    } catch (const std::domain_error &e) {
      throw RunFileError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (seen[idx]) {
      throw RunFileError(path.string() + ":" + std::to_string(line_no) + ": duplicate sector");
    }
    seen[idx] = true;
    probs[idx] = p;
  }
  try {
    return make_sector_distribution(n, std::move(probs));
  } catch (const std::exception &e) {
    throw RunFileError(path.string() + ": " + e.what());
  }
}

inline double parse_kernel_width(const json &kernel, const std::string &where) {
  const std::string type = require_string(kernel, where, "type");
  if (type == "strong") {
    reject_unknown_keys(kernel, where, {"type"});
    return 0.0;
  }
  if (type == "gaussian") {
    reject_unknown_keys(kernel, where, {"type", "w"});
    const json &w = require_key(kernel, where, "w");
    if (w.is_string()) {
      if (w.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
      fail(where + ".w", "expected a number >= 0 or \"inf\"");
    }
    if (!w.is_number()) fail(where + ".w", "expected a number >= 0 or \"inf\"");
    double width = w.get<double>();
    if (!(width >= 0.0)) fail(where + ".w", "width must be >= 0");
    return width;
  }
  fail(where + ".type", "expected \"strong\" or \"gaussian\"");
}

/// lambda given directly or as (dt, T) through 1 - exp(-dt/T).
inline double parse_lambda(const json &channel, const std::string &where) {
  const bool has_lambda = channel.contains("lambda");
  const bool has_interval = channel.contains("dt") || channel.contains("T");
  if (has_lambda && has_interval) fail(where, "give either lambda or (dt, T), not both");
  if (has_lambda) {
    double lambda = require_number(channel, where, "lambda");
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail(where + ".lambda", "must be in [0, 1]");
    return lambda;
  }
  if (has_interval) {
    double dt = require_number(channel, where, "dt");
    double relaxation = require_number(channel, where, "T");
    try {
      return lambda_from_interval(dt, relaxation);
    } catch (const std::domain_error &e) {
      fail(where, e.what());
    }
  }
  fail(where, "missing lambda (or dt and T)");
}

inline ChannelSpec parse_channel(const json &channel, const std::string &where, int n,
                                 const std::filesystem::path &base_dir) {
  if (!channel.is_object()) fail(where, "expected an object");
  const std::string type = require_string(channel, where, "type");
  if (type == "collective_depolarizing") {
    reject_unknown_keys(channel, where, {"type", "lambda", "dt", "T"});
    return ChannelSpec::collective_depolarizing(parse_lambda(channel, where));
  }
  if (type == "epsilon_polarizing") {
    reject_unknown_keys(channel, where, {"type", "lambda", "dt", "T", "q_ref_path"});
    double lambda = parse_lambda(channel, where);
    std::string rel = require_string(channel, where, "q_ref_path");
    return ChannelSpec::epsilon_polarizing(lambda, read_distribution_csv(base_dir / rel, n));
  }
  if (type == "product") {
    reject_unknown_keys(channel, where, {"type", "alpha", "beta"});
    double alpha = require_number(channel, where, "alpha");
    double beta = require_number(channel, where, "beta");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(where + ".alpha", "must be in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) fail(where + ".beta", "must be in [0, 1]");
    return ChannelSpec::product_flips(alpha, beta);
  }
  if (type == "product_from_rotation") {
    reject_unknown_keys(channel, where, {"type", "lambda", "dt", "T", "theta"});
    double lambda = parse_lambda(channel, where);
    double theta = require_number(channel, where, "theta");
    return ChannelSpec::product_from_rotation(lambda, theta);
  }
  fail(where + ".type",
       "expected one of \"collective_depolarizing\", \"epsilon_polarizing\", \"product\", "
       "\"product_from_rotation\"");
}

inline InitialStateSpec parse_initial(const json &initial, const std::string &where, int n,
                                      const std::filesystem::path &base_dir) {
  if (!initial.is_object()) fail(where, "expected an object");
  const std::string type = require_string(initial, where, "type");
  if (type == "mixed") {
    reject_unknown_keys(initial, where, {"type"});
    return InitialStateSpec::mixed();
  }
  if (type == "product") {
    reject_unknown_keys(initial, where, {"type", "a"});
    double a = require_number(initial, where, "a");
    if (!(a >= 0.0 && a <= 1.0)) fail(where + ".a", "must be in [0, 1]");
    return InitialStateSpec::product(a);
  }
  if (type == "sector") {
    reject_unknown_keys(initial, where, {"type", "q0_path"});
    std::string rel = require_string(initial, where, "q0_path");
    return InitialStateSpec::sector(read_distribution_csv(base_dir / rel, n));
  }
  fail(where + ".type", "expected one of \"mixed\", \"product\", \"sector\"");
}

}  // namespace runfile_detail

inline RunFile parse_run_document(const nlohmann::json &doc,
                                  const std::filesystem::path &base_dir = ".") {
  using namespace runfile_detail;
  if (!doc.is_object()) throw RunFileError("run file: top level must be an object");
  reject_unknown_keys(doc, "run file",
                      {"n", "kernel", "channel", "initial", "steps", "trajectories", "seed", "output_dir"});

  RunFile out;
  out.source = doc;

  std::int64_t n = require_integer(doc, "run file", "n");
  if (n < 1) fail("run file.n", "must be >= 1");
  out.config.ensemble_size = static_cast<int>(n);

  const json &kernel = require_key(doc, "run file", "kernel");
  if (!kernel.is_object()) fail("run file.kernel", "expected an object");
  out.config.kernel_width = parse_kernel_width(kernel, "run file.kernel");

  out.config.channel =
      parse_channel(require_key(doc, "run file", "channel"), "run file.channel", out.config.ensemble_size, base_dir);
  out.config.initial =
      parse_initial(require_key(doc, "run file", "initial"), "run file.initial", out.config.ensemble_size, base_dir);

  std::int64_t steps = require_integer(doc, "run file", "steps");
  if (steps < 1) fail("run file.steps", "must be >= 1");
  out.config.steps = static_cast<int>(steps);

  if (doc.contains("trajectories")) {
    std::int64_t count = require_integer(doc, "run file", "trajectories");
    if (count < 0) fail("run file.trajectories", "must be >= 0");
    out.config.trajectories = static_cast<int>(count);
  }
  if (doc.contains("seed")) {
    const json &seed = doc.at("seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) fail("run file.seed", "expected an integer");
    out.config.seed = seed.get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    out.output_dir = require_string(doc, "run file", "output_dir");
  }
  return out;
}

inline RunFile parse_run_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw RunFileError("cannot open run file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    // e.what() carries the byte offset; prefix the file name.
    throw RunFileError(path.string() + ": " + e.what());
  }
  return parse_run_document(doc, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace spinchain

#endif
