#include "tabalign/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabalign/error.hpp"

namespace tabalign {

using nlohmann::json;

namespace {

constexpr std::array kCommands{"solve", "bon", "itp", "sweep-n", "sweep-beta", "concentration", "verify", "fixtures"};

const std::set<std::string> kKeys{"instance", "command",  "algorithms", "n_grid",       "beta_grid",
                                  "replicates", "seed",   "mode",       "format",       "out",
                                  "prompt",   "fallback", "sample_reuse", "lambda_draws", "trials",
                                  "delta",    "threads"};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

std::string get_string(const json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

std::uint64_t get_unsigned(const json& node, const std::string& path) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer()) fail(path, "must be nonnegative");
  fail(path, "expected an integer");
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

bool get_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) fail(path, "expected true or false");
  return node.get<bool>();
}

template <class Fn>
void each(const json& node, const std::string& path, Fn&& fn) {
  if (!node.is_array()) fail(path, "expected an array");
  if (node.empty()) fail(path, "must not be empty");
  for (std::size_t i = 0; i < node.size(); ++i) fn(node[i], path + "/" + std::to_string(i));
}

}  // namespace

bool is_known_command(const std::string& command) noexcept {
  return std::find(kCommands.begin(), kCommands.end(), command) != kCommands.end();
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("", "config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKeys.count(item.key())) fail("/" + item.key(), "unknown key");
  }
  for (const char* required : {"instance", "command"}) {
    if (!doc.contains(required)) fail("/" + std::string(required), "missing required field");
  }

  RunConfig c;
  c.command = get_string(doc["command"], "/command");
  if (!is_known_command(c.command)) fail("/command", "unknown command '" + c.command + "'");
  std::filesystem::path inst = get_string(doc["instance"], "/instance");
  if (inst.is_relative() && !base_dir.empty()) inst = base_dir / inst;
  c.instance = inst.lexically_normal();
  if (!std::filesystem::exists(c.instance)) fail("/instance", "file not found: " + c.instance.string());

  SweepConfig& s = c.sweep;
  if (doc.contains("algorithms")) {
    s.algorithms.clear();
    each(doc["algorithms"], "/algorithms", [&](const json& v, const std::string& p) {
      try {
        s.algorithms.push_back(parse_algorithm(get_string(v, p)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Config) throw;
        fail(p, "expected one of reference, bon, itp");
      }
    });
  }
  if (doc.contains("n_grid")) {
    s.n_grid.clear();
    each(doc["n_grid"], "/n_grid", [&](const json& v, const std::string& p) {
      const auto n = get_unsigned(v, p);
      if (n == 0) fail(p, "must be >= 1");
      s.n_grid.push_back(static_cast<std::size_t>(n));
    });
  }
  if (doc.contains("beta_grid")) {
    each(doc["beta_grid"], "/beta_grid", [&](const json& v, const std::string& p) {
      const double b = get_number(v, p);
      if (!(b > 0.0) || !std::isfinite(b)) fail(p, "must be positive");
      s.beta_grid.push_back(b);
    });
  }
  if (doc.contains("replicates")) {
    s.replicates = static_cast<std::size_t>(get_unsigned(doc["replicates"], "/replicates"));
    if (s.replicates == 0) fail("/replicates", "must be >= 1");
  }
  if (doc.contains("seed")) s.seed = get_unsigned(doc["seed"], "/seed");
  if (doc.contains("mode")) {
    const auto m = get_string(doc["mode"], "/mode");
    if (m == "monte_carlo") {
      s.mode = RunMode::MonteCarlo;
    } else if (m == "exact_law") {
      s.mode = RunMode::ExactLaw;
    } else {
      fail("/mode", "expected monte_carlo or exact_law");
    }
  }
  if (doc.contains("format")) {
    const auto f = get_string(doc["format"], "/format");
    if (f != "csv" && f != "json") fail("/format", "expected csv or json");
    c.format = parse_format(f);
  }
  if (doc.contains("out")) {
    std::filesystem::path out = get_string(doc["out"], "/out");
    if (out.is_relative() && !base_dir.empty() && out != "-") out = base_dir / out;
    c.out = out;
  }
  if (doc.contains("prompt")) {
    const json& p = doc["prompt"];
    if (p.is_string()) {
      c.prompt = p.get<std::string>();
    } else if (p.is_number_integer()) {
      c.prompt = std::to_string(p.get<long long>());
    } else {
      fail("/prompt", "expected a prompt id");
    }
  }
  if (doc.contains("fallback")) {
    const auto f = get_string(doc["fallback"], "/fallback");
    if (f == "reference_draw") {
      s.fallback = ItpFallback::ReferenceDraw;
    } else if (f == "best_of_n") {
      s.fallback = ItpFallback::BestOfN;
    } else {
      fail("/fallback", "expected reference_draw or best_of_n");
    }
  }
  if (doc.contains("sample_reuse")) {
    s.sample_mode = get_bool(doc["sample_reuse"], "/sample_reuse") ? SampleMode::Reuse : SampleMode::Fresh;
  }
  if (doc.contains("lambda_draws")) {
    s.lambda_draws = static_cast<std::size_t>(get_unsigned(doc["lambda_draws"], "/lambda_draws"));
    if (s.lambda_draws == 0) fail("/lambda_draws", "must be >= 1");
  }
  if (doc.contains("trials")) {
    c.trials = static_cast<std::size_t>(get_unsigned(doc["trials"], "/trials"));
    if (c.trials == 0) fail("/trials", "must be >= 1");
  }
  if (doc.contains("delta")) {
    c.delta = get_number(doc["delta"], "/delta");
    if (!(c.delta > 0.0 && c.delta < 1.0)) fail("/delta", "must lie in (0, 1)");
  }
  if (doc.contains("threads")) {
    const auto t = get_unsigned(doc["threads"], "/threads");
    if (t == 0 || t > 1024) fail("/threads", "must lie in [1, 1024]");
    s.threads = static_cast<unsigned>(t);
  }
  const bool has_itp = std::find(s.algorithms.begin(), s.algorithms.end(), Algorithm::Itp) != s.algorithms.end();
  if ((has_itp || c.command == "sweep-beta") && s.beta_grid.empty()) fail("/beta_grid", "missing required field");
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  const SweepConfig& s = c.sweep;
  json doc;
  doc["instance"] = c.instance.string();
  doc["command"] = c.command;
  json algs = json::array();
  for (Algorithm a : s.algorithms) algs.push_back(std::string(to_string(a)));
  doc["algorithms"] = algs;
  doc["n_grid"] = s.n_grid;
  doc["beta_grid"] = s.beta_grid;
  doc["replicates"] = s.replicates;
  doc["seed"] = s.seed;
  doc["mode"] = s.mode == RunMode::MonteCarlo ? "monte_carlo" : "exact_law";
  doc["format"] = std::string(to_string(c.format));
  doc["out"] = c.out ? json(c.out->string()) : json(nullptr);
  doc["prompt"] = c.prompt ? json(*c.prompt) : json(nullptr);
  doc["fallback"] = s.fallback == ItpFallback::ReferenceDraw ? "reference_draw" : "best_of_n";
  doc["sample_reuse"] = s.sample_mode == SampleMode::Reuse;
  doc["lambda_draws"] = s.lambda_draws;
  doc["trials"] = c.trials;
  doc["delta"] = c.delta;
  doc["threads"] = s.threads;
  return doc.dump(2);
}

}  // namespace tabalign
