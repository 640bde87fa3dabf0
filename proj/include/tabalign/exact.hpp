#pragma once

#include <cstddef>
#include <span>

#include "tabalign/distribution.hpp"
#include "tabalign/instance.hpp"

namespace tabalign {

/// π = π_ref·relu((r̂ − λ)/β) together with its normalizer.
struct RegularizedSolution {
  DiscreteDistribution policy;
  double lambda = 0.0;
  double beta = 1.0;
  /// E_π[r̂] − (β/2)(C¹[π] − 1), i.e. expected modeled reward minus β·χ²(π‖π_ref).
  double objective_value = 0.0;
};

/// Exact output law of a rejection-based sampler.  `degenerate` is set when
/// the accepted mass is zero and the law collapses to π_ref.
struct SamplerLaw {
  DiscreteDistribution law;
  double accepted_mass = 0.0;     ///< A = Σ min{π, M·π_ref}
  double fallback_probability = 0.0;
  bool degenerate = false;
};

/// Value of the χ²-regularized objective for an arbitrary policy.
double chi2_objective(const DiscreteDistribution& policy, const DiscreteDistribution& pi_ref,
                      std::span<const double> modeled_reward, double beta);

RegularizedSolution exact_chi2_policy(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                      double beta);
RegularizedSolution exact_chi2_policy(const ProblemInstance& instance, std::size_t prompt, double beta);

/// π_ref·exp(r̂/β), normalized.
DiscreteDistribution exact_kl_policy(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                     double beta);
DiscreteDistribution exact_kl_policy(const ProblemInstance& instance, std::size_t prompt, double beta);

/// Law of the best of N i.i.d. π_ref draws under r̂.  Equal rewards are
/// ordered so that the lowest response index wins, matching best_of_n.
DiscreteDistribution exact_bon_law(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                   std::size_t n);
DiscreteDistribution exact_bon_law(const ProblemInstance& instance, std::size_t prompt, std::size_t n);

/// Law of rejection sampling toward a (pseudo) target with threshold M and
/// N proposals, including the fallback (N+1)-th draw.
SamplerLaw exact_rejection_law(const DiscreteDistribution& target, const DiscreteDistribution& pi_ref, double m,
                               std::size_t n);

/// Φ(λ) = Σ π_ref·relu((r̂ − λ)/β) on the full prompt.
double normalizer_mass(const Prompt& prompt, double lambda, double beta);

/// Law of InferenceTimePessimism given the normalizer estimate λ̂, with
/// M = (Rmax − λ̂)/β.  Requires λ̂ ∈ [−β, Rmax − β].
SamplerLaw exact_itp_law(const ProblemInstance& instance, std::size_t prompt, double beta, double lambda_hat,
                         std::size_t n);

/// J(π*) − J(π̂) under the true reward; may be negative.
double regret(const ProblemInstance& instance, std::size_t prompt, const DiscreteDistribution& comparator,
              const DiscreteDistribution& achieved);

struct SkylineBound {
  double value = 0.0;
  /// False when C* < 16, where the bound is not claimed.
  bool asserted = true;
};

/// (1/4)·√(C*·ε²).
SkylineBound skyline_bound(double c_star, double eps_rm);

}  // namespace tabalign
