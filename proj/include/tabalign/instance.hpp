#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tabalign/distribution.hpp"

namespace tabalign {

/// Raw, unvalidated description of one prompt.
struct PromptSpec {
  std::string id;
  std::vector<double> weights;
  std::vector<double> reward_model;
  std::vector<double> true_reward;
  std::optional<std::vector<double>> comparator;
};

struct InstanceSpec {
  std::vector<PromptSpec> prompts;
  double reward_cap = 1.0;
  std::optional<std::vector<double>> prompt_distribution;
};

struct Prompt {
  std::string id;
  DiscreteDistribution base_policy;
  std::vector<double> reward_model;
  std::vector<double> true_reward;
  /// Comparator π* when the instance declares one.
  std::optional<DiscreteDistribution> comparator;

  std::size_t response_count() const noexcept { return base_policy.size(); }
};

/// Per-prompt comparator π*.
struct ComparatorPolicy {
  std::vector<DiscreteDistribution> per_prompt;
};

/// Finite prompt/response problem: base policy, modeled and true rewards,
/// reward cap and prompt distribution.  Immutable once built.
class ProblemInstance {
 public:
  const std::vector<Prompt>& prompts() const noexcept { return prompts_; }
  std::size_t prompt_count() const noexcept { return prompts_.size(); }
  const Prompt& prompt(std::size_t index) const;
  /// Index of the prompt with the given id; throws UnknownPrompt.
  std::size_t prompt_index(const std::string& id) const;
  double reward_cap() const noexcept { return reward_cap_; }
  const DiscreteDistribution& prompt_distribution() const noexcept { return rho_; }
  bool has_explicit_prompt_distribution() const noexcept { return rho_explicit_; }

  /// π* for the prompt: the declared comparator, or the point mass on the
  /// lowest-index maximizer of r* when none is declared.
  DiscreteDistribution comparator_for(std::size_t prompt) const;

 private:
  friend ProblemInstance build_tabular_instance(const InstanceSpec& spec);

  std::vector<Prompt> prompts_;
  double reward_cap_ = 1.0;
  DiscreteDistribution rho_;
  bool rho_explicit_ = false;
};

/// Validates a raw spec.  Rows within 1e-9 of unit mass are renormalized;
/// negative weights, zero-mass rows and rewards outside [0, r_max] are each
/// rejected with a distinct error code.
ProblemInstance build_tabular_instance(const InstanceSpec& spec);

InstanceSpec to_spec(const ProblemInstance& instance);

/// JSON: {prompts:[{id, weights, r_hat, r_star, comparator?}], r_max, rho?}
ProblemInstance load_instance(const std::filesystem::path& path);
ProblemInstance parse_instance_json(const std::string& text);
std::string instance_to_json(const ProblemInstance& instance);
void save_instance(const ProblemInstance& instance, const std::filesystem::path& path);

}  // namespace tabalign
