#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tabalign/instance.hpp"
#include "tabalign/rng.hpp"

namespace tabalign {

/// One sample-and-evaluate query result.
struct Draw {
  std::size_t response = 0;
  double base_likelihood = 0.0;  ///< π_ref(y | x), exact stored value
  double modeled_reward = 0.0;   ///< r̂(x, y)
};

/// Seeded sample-and-evaluate access to (π_ref, r̂) for a single prompt.
///
/// Draws use inverse-CDF sampling over right-closed intervals (c_{i-1}, c_i]
/// with u ∈ (0, 1], so zero-mass responses are never returned.  Oracle draws
/// and algorithm-side coin flips come from separate Philox lanes: spending
/// coins never perturbs the draw sequence.  A session is single-owner.
class OracleSession {
 public:
  OracleSession(const ProblemInstance& instance, std::size_t prompt, std::uint64_t seed);

  std::vector<Draw> draw_batch(std::size_t n);
  Draw draw_one();

  /// Uniform (0,1] variate for the algorithm's own randomness; not a query.
  double coin() noexcept { return coins_.uniform_open_closed(); }

  std::uint64_t queries_used() const noexcept { return queries_; }
  std::size_t prompt_index() const noexcept { return prompt_; }
  const Prompt& prompt() const noexcept { return *data_; }
  const ProblemInstance& instance() const noexcept { return *instance_; }
  double reward_cap() const noexcept { return instance_->reward_cap(); }

 private:
  const ProblemInstance* instance_;
  const Prompt* data_;
  std::size_t prompt_;
  std::vector<double> cumulative_;
  CounterRng draws_;
  CounterRng coins_;
  std::uint64_t queries_ = 0;
};

/// Session keyed by (seed, prompt id).
OracleSession open_session(const ProblemInstance& instance, const std::string& prompt_id,
                           std::uint64_t seed);
OracleSession open_session(const ProblemInstance& instance, std::size_t prompt, std::uint64_t seed);

}  // namespace tabalign
