#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tabalign {

/// Nonnegative weights over a finite response index set.  A normalized
/// distribution sums to one within 1e-12; a pseudo-distribution carries an
/// arbitrary total mass (used for truncated targets and Δ_k members).
class DiscreteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kRenormalizeTolerance = 1e-9;

  DiscreteDistribution() = default;

  /// Validates and, when the deviation from one is at most 1e-9, rescales so
  /// the stored weights sum to one.  Larger deviations are rejected.
  static DiscreteDistribution normalized(std::vector<double> weights);
  static DiscreteDistribution pseudo(std::vector<double> weights);
  static DiscreteDistribution uniform(std::size_t n);
  static DiscreteDistribution point_mass(std::size_t n, std::size_t index);

  std::size_t size() const noexcept { return weights_.size(); }
  bool is_normalized() const noexcept { return normalized_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  double total_mass() const noexcept;

  auto begin() const noexcept { return weights_.begin(); }
  auto end() const noexcept { return weights_.end(); }

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  DiscreteDistribution(std::vector<double> w, bool normalized)
      : weights_(std::move(w)), normalized_(normalized) {}

  std::vector<double> weights_;
  bool normalized_ = false;
};

}  // namespace tabalign
