#include "tabalign/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tabalign/error.hpp"

namespace tabalign {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidParameter, "beta must be a finite positive value");
  }
}

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double scan(std::span<const double> rewards, std::span<const double> weights, double beta) {
  std::vector<std::size_t> order;
  order.reserve(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!std::isfinite(rewards[i])) throw Error(ErrorCode::InvalidParameter, "non-finite reward");
    if (weights[i] > 0.0) order.push_back(i);
  }
  if (order.empty()) throw Error(ErrorCode::ZeroMassRow, "normalizer needs positive total weight");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rewards[a] > rewards[b]; });

  // Add buckets from the top.  With the top buckets active the equation is
  // J − λZ = β, so λ = (J − β)/Z; stop at the first bucket whose candidate
  // does not reach below the next reward value.
  Accumulator weighted_sum;
  Accumulator mass;
  std::size_t k = 0;
  while (true) {
    const double value = rewards[order[k]];
    while (k < order.size() && rewards[order[k]] == value) {
      weighted_sum.add(weights[order[k]] * value);
      mass.add(weights[order[k]]);
      ++k;
    }
    const double lambda = (weighted_sum.value() - beta) / mass.value();
    if (k == order.size() || lambda >= rewards[order[k]]) return lambda;
  }
}

}  // namespace

double compute_norm_constant_weighted(std::span<const double> rewards, const DiscreteDistribution& weights,
                                      double beta) {
  check_beta(beta);
  if (rewards.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rewards and weights differ in size (" +
                                                  std::to_string(rewards.size()) + " vs " +
                                                  std::to_string(weights.size()) + ")");
  }
  if (rewards.empty()) throw Error(ErrorCode::InvalidParameter, "normalizer needs at least one reward");
  return scan(rewards, weights.weights(), beta);
}

double compute_norm_constant_empirical(std::span<const double> rewards, double beta) {
  if (rewards.empty()) throw Error(ErrorCode::InvalidParameter, "normalizer needs at least one reward");
  return compute_norm_constant_weighted(rewards, DiscreteDistribution::uniform(rewards.size()), beta);
}

double relu_mass(std::span<const double> rewards, std::span<const double> weights, double lambda, double beta) {
  check_beta(beta);
  if (rewards.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "rewards and weights differ in size");
  Accumulator acc;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (weights[i] > 0.0 && rewards[i] > lambda) acc.add(weights[i] * (rewards[i] - lambda));
  }
  return acc.value() / beta;
}

double empirical_relu_mass(std::span<const double> rewards, double lambda, double beta) {
  check_beta(beta);
  if (rewards.empty()) throw Error(ErrorCode::InvalidParameter, "empty reward sample");
  Accumulator acc;
  for (double r : rewards) {
    if (r > lambda) acc.add(r - lambda);
  }
  return acc.value() / (beta * static_cast<double>(rewards.size()));
}

}  // namespace tabalign
