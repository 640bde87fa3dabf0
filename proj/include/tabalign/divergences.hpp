#pragma once

#include <map>
#include <span>

#include "tabalign/distribution.hpp"
#include "tabalign/instance.hpp"

namespace tabalign {

/// Coverage coefficients of π against π_ref.  c_inf is +infinity when π puts
/// mass where π_ref has none.
struct CoverageReport {
  double c_one = 1.0;
  double c_inf = 1.0;
  std::map<double, double> c_alpha;
};

double expected_reward(const DiscreteDistribution& policy, std::span<const double> reward);

/// Σ π_ref (r̂ − r*)² for one prompt.
double reward_error(const ProblemInstance& instance, std::size_t prompt);

/// Σ π²/π_ref.  Throws UncoveredSupport when π is not dominated by π_ref.
double coverage_l1(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref);
/// max π/π_ref.  Throws UncoveredSupport when π is not dominated by π_ref.
double coverage_inf(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref);
/// (1/α) Σ π (π/π_ref)^{α−1}; the 1/α factor makes C_2 = C¹/2.
double coverage_alpha(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double alpha);

CoverageReport coverage_report(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref,
                               std::span<const double> alphas = {});

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Σ π_ref · (π/π_ref − M)_+ ; entries with π_ref = 0 contribute π(y).
double e_m_divergence(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double m);

/// Smallest M ≥ 1 with E_M ≤ eps, solved on the piecewise-linear E_M.
/// Returns +infinity if the uncovered mass alone exceeds eps.
double m_star(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double eps);

}  // namespace tabalign
