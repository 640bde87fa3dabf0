#pragma once

#include <cstddef>
#include <optional>

#include "tabalign/distribution.hpp"
#include "tabalign/instance.hpp"

namespace tabalign {

/// Single-prompt lower-bound construction together with its comparator.
struct LowerBoundFixture {
  ProblemInstance instance;
  ComparatorPolicy comparator;
  /// Constant added to both reward functions to land them in [0, r_max].
  double reward_shift = 0.0;
};

enum class CinfVariant { SmallN, LargeN };

/// Three responses (y0, y*, y_bad) with π_ref = (1 − 1/(2N) − 1/C, 1/C, 1/(2N))
/// and π* the point mass on y*.  SmallN uses the impossibility rewards, LargeN
/// puts the top modeled reward on y_bad with true-reward gap min{1, √(N ε²)}.
LowerBoundFixture build_cinf_lower_instance(double coverage, std::size_t n, double eps_rm,
                                            CinfVariant variant, double reward_cap = 1.0);

enum class ConeVariant { Part1, Part2 };

struct ConeParams {
  double coverage = 8.0;             ///< C; the comparator saturates at I = ⌈log₂ C⌉
  double truncation_tail = 1e-9;     ///< stop once the π_ref tail mass drops below this
  ConeVariant variant = ConeVariant::Part2;
  double eps_rm = 0.05;              ///< reward-model error budget
  std::size_t n = 256;               ///< query budget the Part2 rewards are tuned for
  std::optional<double> tolerance;   ///< Part1 TV tolerance ε (defaults to eps_rm)
  double exponent = 0.5;             ///< Part1 exponent p
  double reward_cap = 1.0;
};

/// The truncated geometric pair π_ref(i) = 3·4^{-i}, π*(i) = 2^{-i} (i ≤ I),
/// 3·2^I·4^{-i} (i > I), with the dropped tail folded into the last index.
/// `min_length` forces at least that many retained responses.
struct ConePolicies {
  DiscreteDistribution base;
  DiscreteDistribution comparator;
  int saturation_index = 0;  ///< I
};
ConePolicies cone_policies(double coverage, double truncation_tail, std::size_t min_length = 0);

LowerBoundFixture build_cone_lower_instance(const ConeParams& params);

struct SkylineFixture {
  ProblemInstance instance;
  DiscreteDistribution comparator;
  DiscreteDistribution candidate;
  double reward_shift = 0.0;
  /// Factor applied to both rewards after the shift; regrets measured on the
  /// instance equal scale × the unscaled construction's regret.
  double reward_scale = 1.0;
};

/// r̂ ≡ 0 and r* = ε·(π* − π̂)/π_ref normalized by √Σ(π* − π̂)²/π_ref, shifted
/// and (if needed) rescaled into [0, r_max].
SkylineFixture build_skyline_instance(const DiscreteDistribution& base,
                                      const DiscreteDistribution& comparator,
                                      const DiscreteDistribution& candidate, double eps,
                                      double reward_cap = 1.0);

}  // namespace tabalign
