#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabalign/instance.hpp"

namespace testing {

inline tabalign::ProblemInstance one_prompt(std::vector<double> weights, std::vector<double> modeled,
                                            std::vector<double> truth, double cap = 1.0) {
  tabalign::InstanceSpec spec;
  spec.reward_cap = cap;
  spec.prompts.push_back({"x", std::move(weights), std::move(modeled), std::move(truth), std::nullopt});
  return tabalign::build_tabular_instance(spec);
}

// π_ref = (0.5, 0.5), r̂ = r* = (1, 0).
inline tabalign::ProblemInstance coin_fixture() { return one_prompt({0.5, 0.5}, {1.0, 0.0}, {1.0, 0.0}); }

inline std::string source_path(const std::string& rel) { return std::string(TABALIGN_SOURCE_DIR) + "/" + rel; }

}  // namespace testing
