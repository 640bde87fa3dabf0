#pragma once

#include <span>

#include "tabalign/distribution.hpp"

namespace tabalign {

/// λ solving Σ w(y)·relu((r(y) − λ)/β) = 1 by a sort-and-scan over reward
/// buckets.  Zero-weight entries are ignored; equal rewards share a bucket by
/// exact comparison.  O(n log n).
double compute_norm_constant_weighted(std::span<const double> rewards, const DiscreteDistribution& weights,
                                      double beta);

/// The same with uniform weights 1/N over a reward sample.
double compute_norm_constant_empirical(std::span<const double> rewards, double beta);

/// Φ(λ) = Σ w(y)·relu((r(y) − λ)/β).
double relu_mass(std::span<const double> rewards, std::span<const double> weights, double lambda, double beta);

/// Φ̂(λ) = (1/N) Σ relu((r_i − λ)/β).
double empirical_relu_mass(std::span<const double> rewards, double lambda, double beta);

}  // namespace tabalign
