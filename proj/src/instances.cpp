#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabalign/error.hpp"
#include "tabalign/instance.hpp"

namespace tabalign {

using nlohmann::json;

const Prompt& ProblemInstance::prompt(std::size_t index) const {
  if (index >= prompts_.size()) {
    throw Error(ErrorCode::UnknownPrompt, "prompt index " + std::to_string(index));
  }
  return prompts_[index];
}

std::size_t ProblemInstance::prompt_index(const std::string& id) const {
  for (std::size_t i = 0; i < prompts_.size(); ++i) {
    if (prompts_[i].id == id) return i;
  }
  throw Error(ErrorCode::UnknownPrompt, "no prompt with id '" + id + "'");
}

DiscreteDistribution ProblemInstance::comparator_for(std::size_t index) const {
  const Prompt& p = prompt(index);
  if (p.comparator) return *p.comparator;
  std::size_t best = 0;
  for (std::size_t y = 1; y < p.true_reward.size(); ++y) {
    if (p.true_reward[y] > p.true_reward[best]) best = y;
  }
  return DiscreteDistribution::point_mass(p.response_count(), best);
}

namespace {

void check_rewards(const std::vector<double>& r, double cap, const std::string& what) {
  for (std::size_t y = 0; y < r.size(); ++y) {
    if (!std::isfinite(r[y]) || r[y] < 0.0 || r[y] > cap) {
      std::ostringstream msg;
      msg << what << "[" << y << "] = " << r[y] << " outside [0, " << cap << "]";
      throw Error(ErrorCode::RewardOutOfRange, msg.str());
    }
  }
}

DiscreteDistribution checked_row(const std::vector<double>& w, const std::string& id) {
  try {
    return DiscreteDistribution::normalized(w);
  } catch (const Error& e) {
    throw Error(e.code(), "prompt '" + id + "': " + e.what());
  }
}

}  // namespace

ProblemInstance build_tabular_instance(const InstanceSpec& spec) {
  if (!(spec.reward_cap >= 1.0) || !std::isfinite(spec.reward_cap)) {
    throw Error(ErrorCode::InvalidRewardCap, "r_max must be finite and >= 1");
  }
  if (spec.prompts.empty()) {
    throw Error(ErrorCode::InvalidParameter, "instance has no prompts");
  }
  ProblemInstance inst;
  inst.reward_cap_ = spec.reward_cap;
  std::set<std::string> seen;
  for (const PromptSpec& ps : spec.prompts) {
    if (!seen.insert(ps.id).second) {
      throw Error(ErrorCode::InvalidParameter, "duplicate prompt id '" + ps.id + "'");
    }
    const std::size_t n = ps.weights.size();
    if (ps.reward_model.size() != n || ps.true_reward.size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "prompt '" + ps.id + "': weights, r_hat and r_star lengths differ");
    }
    Prompt p;
    p.id = ps.id;
    p.base_policy = checked_row(ps.weights, ps.id);
    check_rewards(ps.reward_model, spec.reward_cap, "prompt '" + ps.id + "' r_hat");
    check_rewards(ps.true_reward, spec.reward_cap, "prompt '" + ps.id + "' r_star");
    p.reward_model = ps.reward_model;
    p.true_reward = ps.true_reward;
    if (ps.comparator) {
      if (ps.comparator->size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "prompt '" + ps.id + "': comparator length");
      }
      p.comparator = checked_row(*ps.comparator, ps.id);
    }
    inst.prompts_.push_back(std::move(p));
  }
  if (spec.prompt_distribution) {
    if (spec.prompt_distribution->size() != spec.prompts.size()) {
      throw Error(ErrorCode::DimensionMismatch, "rho length differs from prompt count");
    }
    inst.rho_ = DiscreteDistribution::normalized(*spec.prompt_distribution);
    inst.rho_explicit_ = true;
  } else {
    inst.rho_ = DiscreteDistribution::uniform(spec.prompts.size());
  }
  return inst;
}

InstanceSpec to_spec(const ProblemInstance& instance) {
  InstanceSpec spec;
  spec.reward_cap = instance.reward_cap();
  for (const Prompt& p : instance.prompts()) {
    PromptSpec ps;
    ps.id = p.id;
    ps.weights.assign(p.base_policy.begin(), p.base_policy.end());
    ps.reward_model = p.reward_model;
    ps.true_reward = p.true_reward;
    if (p.comparator) ps.comparator = std::vector<double>(p.comparator->begin(), p.comparator->end());
    spec.prompts.push_back(std::move(ps));
  }
  if (instance.has_explicit_prompt_distribution()) {
    const auto& rho = instance.prompt_distribution();
    spec.prompt_distribution = std::vector<double>(rho.begin(), rho.end());
  }
  return spec;
}

namespace {

std::vector<double> number_array(const json& node, const std::string& path) {
  if (!node.is_array()) throw Error(ErrorCode::Config, path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      throw Error(ErrorCode::Config, path + "/" + std::to_string(i) + ": expected a number");
    }
    out.push_back(node[i].get<double>());
  }
  return out;
}

}  // namespace

ProblemInstance parse_instance_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("instance: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Config, "/: instance must be an object");
  static const std::set<std::string> top_keys{"prompts", "r_max", "rho"};
  static const std::set<std::string> prompt_keys{"id", "weights", "r_hat", "r_star", "comparator"};
  for (const auto& [key, _] : doc.items()) {
    if (!top_keys.contains(key)) throw Error(ErrorCode::Config, "/" + key + ": unknown key");
  }
  if (!doc.contains("prompts")) throw Error(ErrorCode::Config, "/prompts: missing field");
  if (!doc.contains("r_max")) throw Error(ErrorCode::Config, "/r_max: missing field");
  if (!doc["r_max"].is_number()) throw Error(ErrorCode::Config, "/r_max: expected a number");
  const json& prompts = doc["prompts"];
  if (!prompts.is_array()) throw Error(ErrorCode::Config, "/prompts: expected an array");

  InstanceSpec spec;
  spec.reward_cap = doc["r_max"].get<double>();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const std::string base = "/prompts/" + std::to_string(i);
    const json& p = prompts[i];
    if (!p.is_object()) throw Error(ErrorCode::Config, base + ": expected an object");
    for (const auto& [key, _] : p.items()) {
      if (!prompt_keys.contains(key)) throw Error(ErrorCode::Config, base + "/" + key + ": unknown key");
    }
    for (const char* req : {"id", "weights", "r_hat", "r_star"}) {
      if (!p.contains(req)) throw Error(ErrorCode::Config, base + "/" + req + ": missing field");
    }
    PromptSpec ps;
    if (p["id"].is_string()) {
      ps.id = p["id"].get<std::string>();
    } else if (p["id"].is_number_integer()) {
      ps.id = std::to_string(p["id"].get<long long>());
    } else {
      throw Error(ErrorCode::Config, base + "/id: expected a string");
    }
    ps.weights = number_array(p["weights"], base + "/weights");
    ps.reward_model = number_array(p["r_hat"], base + "/r_hat");
    ps.true_reward = number_array(p["r_star"], base + "/r_star");
    if (p.contains("comparator")) ps.comparator = number_array(p["comparator"], base + "/comparator");
    spec.prompts.push_back(std::move(ps));
  }
  if (doc.contains("rho")) spec.prompt_distribution = number_array(doc["rho"], "/rho");
  return build_tabular_instance(spec);
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance_json(buf.str());
}

std::string instance_to_json(const ProblemInstance& instance) {
  const InstanceSpec spec = to_spec(instance);
  json doc;
  doc["r_max"] = spec.reward_cap;
  doc["prompts"] = json::array();
  for (const PromptSpec& p : spec.prompts) {
    json row{{"id", p.id}, {"weights", p.weights}, {"r_hat", p.reward_model}, {"r_star", p.true_reward}};
    if (p.comparator) row["comparator"] = *p.comparator;
    doc["prompts"].push_back(std::move(row));
  }
  if (spec.prompt_distribution) doc["rho"] = *spec.prompt_distribution;
  return doc.dump(2) + "\n";
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << instance_to_json(instance);
}

}  // namespace tabalign
