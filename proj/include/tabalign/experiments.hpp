#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabalign/algorithms.hpp"
#include "tabalign/instance.hpp"

namespace tabalign {

enum class Algorithm { Reference, BestOfN, Itp };

std::string_view to_string(Algorithm a) noexcept;
/// "reference", "bon" or "itp".
Algorithm parse_algorithm(std::string_view tag);

enum class RunMode { MonteCarlo, ExactLaw };

/// One row of experiment output.  In Monte-Carlo mode a row is one replicate;
/// in exact-law mode rewards are expectations under the computed law and
/// queries, fallback rate and acceptance step are expected values.
struct ExperimentRecord {
  std::string algorithm;
  std::uint64_t n = 0;
  std::optional<double> beta;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  double true_reward = 0.0;
  double modeled_reward = 0.0;
  double regret = 0.0;
  double queries_used = 0.0;
  double fallback_rate = 0.0;
  /// Proposals examined by the acceptance pass (ITP only).
  std::optional<double> accept_step;

  bool operator==(const ExperimentRecord&) const = default;
};

/// Canonical order: (algorithm, N, beta with absent first, replicate).
bool record_less(const ExperimentRecord& a, const ExperimentRecord& b);

struct AlgorithmParams {
  Algorithm algorithm = Algorithm::BestOfN;
  std::size_t n = 1;
  std::optional<double> beta;
  ItpFallback fallback = ItpFallback::ReferenceDraw;
  SampleMode sample_mode = SampleMode::Reuse;
};

struct SweepConfig {
  std::vector<Algorithm> algorithms{Algorithm::BestOfN};
  std::vector<std::size_t> n_grid{1};
  std::vector<double> beta_grid;
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::MonteCarlo;
  std::size_t prompt = 0;
  ItpFallback fallback = ItpFallback::ReferenceDraw;
  SampleMode sample_mode = SampleMode::Reuse;
  /// λ̂ draws per ITP cell in exact-law mode.
  std::size_t lambda_draws = 256;
  /// Worker count; results never depend on it.
  unsigned threads = 1;
};

void validate(const SweepConfig& config, const ProblemInstance& instance);

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean regret and its standard error over independent replicates.  With
/// `identical_seeds` every replicate reuses the base seed.
Estimate estimate_regret_mc(const ProblemInstance& instance, std::size_t prompt, const AlgorithmParams& params,
                            std::size_t replicates, std::uint64_t seed, bool identical_seeds = false,
                            unsigned threads = 1);

/// Every (algorithm, N[, β]) cell of the grid.  ITP cells range over the β grid.
std::vector<ExperimentRecord> sweep_n(const ProblemInstance& instance, const SweepConfig& config);

/// ITP cells only, over the β grid for each N.
std::vector<ExperimentRecord> sweep_beta(const ProblemInstance& instance, const SweepConfig& config);

struct CellSummary {
  std::string algorithm;
  std::uint64_t n = 0;
  std::optional<double> beta;
  std::size_t count = 0;
  Estimate regret;
  Estimate true_reward;
  Estimate modeled_reward;
  double queries_used = 0.0;
  double fallback_rate = 0.0;
  std::optional<double> accept_step;
};

/// Per-cell means with normal-approximation standard errors, in canonical order.
std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records);

/// ⌈48·((Rmax+β)/β)·ln(60·Rmax/(β·δ))⌉ samples suffice for Φ(λ̂) ∈ [1/2, 3/2]
/// with probability 1 − δ.
std::size_t prescribed_sample_size(double reward_cap, double beta, double delta);

struct ConcentrationResult {
  double fraction = 0.0;
  std::vector<double> masses;  ///< Φ(λ̂) per trial
};

ConcentrationResult lambda_concentration_trial(const ProblemInstance& instance, std::size_t prompt, double beta,
                                               std::size_t n, std::size_t trials, std::uint64_t seed);

struct PromptSummary {
  std::string prompt;
  double weight = 0.0;
  double regret = 0.0;
  double reward_error = 0.0;
  double c_one = 0.0;
  double c_inf = 0.0;
};

struct IidAverage {
  std::vector<PromptSummary> prompts;
  double regret = 0.0;        ///< E_ρ regret
  double reward_error = 0.0;  ///< E_ρ ε²
  double c_one = 0.0;         ///< E_ρ C¹
  double c_inf = 0.0;         ///< sup over prompts of C∞
};

/// ρ-weighted exact regret of one algorithm at a single N across prompts.
/// ITP laws are averaged over `lambda_draws` normalizer estimates per prompt.
IidAverage iid_prompt_average(const ProblemInstance& instance, const AlgorithmParams& params,
                              std::uint64_t seed = 0, std::size_t lambda_draws = 256);

}  // namespace tabalign
