#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tabalign/distribution.hpp"
#include "tabalign/rng.hpp"

// Slow, direct reference computations.  None of these call into the solvers
// they are used to check.
namespace tabalign::verify {

/// Root of Σ w·relu((r − λ)/β) = total by bisection in extended precision.
double bisect_normalizer(std::span<const double> rewards, std::span<const double> weights, double beta,
                         double total = 1.0);
long double relu_mass_ld(std::span<const double> rewards, std::span<const double> weights, long double lambda,
                         double beta);

/// Law of the selected index over all |Y|^N tuples; ties go to the lowest index.
std::vector<double> enumerate_bon_law(std::span<const double> pi_ref, std::span<const double> rewards,
                                      std::size_t n);

/// Rejection-sampling law summed step by step over the N proposals.
std::vector<double> series_rejection_law(std::span<const double> target, std::span<const double> pi_ref, double m,
                                         std::size_t n);

/// Σ π_ref (π/π_ref − M)_+ written as Σ max(π − M π_ref, 0).
double e_m_direct(std::span<const double> pi, std::span<const double> pi_ref, double m);

/// Σ p·r
double dot(std::span<const double> p, std::span<const double> r);

/// E_π[r] − (β/2)(Σ π²/π_ref − 1).
double chi2_objective_direct(std::span<const double> pi, std::span<const double> pi_ref,
                             std::span<const double> rewards, double beta);

/// Small deterministic sampler helpers for randomized checks.
class Sampler {
 public:
  explicit Sampler(std::uint64_t key) : rng_(key) {}
  double uniform() { return rng_.uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  double log_uniform(double lo, double hi);
  std::size_t index(std::size_t n);  ///< uniform on [0, n)
  double exponential() { return -std::log(rng_.uniform_open_closed()); }
  /// Flat Dirichlet draw of dimension n; entries strictly positive.
  std::vector<double> simplex(std::size_t n);
  CounterRng& engine() { return rng_; }

 private:
  CounterRng rng_;
};

}  // namespace tabalign::verify
