#include "tabalign/distribution.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tabalign/error.hpp"

namespace tabalign {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeWeight: return "negative-weight";
    case ErrorCode::ZeroMassRow: return "zero-mass-row";
    case ErrorCode::NotNormalized: return "not-normalized";
    case ErrorCode::RewardOutOfRange: return "reward-out-of-range";
    case ErrorCode::InvalidRewardCap: return "invalid-reward-cap";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::UnknownPrompt: return "unknown-prompt";
    case ErrorCode::UncoveredSupport: return "uncovered-support";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::InfeasibleFixture: return "infeasible-fixture";
    case ErrorCode::MissingPromptDistribution: return "missing-prompt-distribution";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

namespace {

void check_entries(const std::vector<double>& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) {
      throw Error(ErrorCode::InvalidParameter, "weight " + std::to_string(i) + " is not finite");
    }
    if (w[i] < 0.0) {
      throw Error(ErrorCode::NegativeWeight,
                  "weight " + std::to_string(i) + " = " + std::to_string(w[i]));
    }
  }
}

}  // namespace

DiscreteDistribution DiscreteDistribution::normalized(std::vector<double> weights) {
  if (weights.empty()) {
    throw Error(ErrorCode::ZeroMassRow, "empty weight vector");
  }
  check_entries(weights);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (sum <= 0.0) {
    throw Error(ErrorCode::ZeroMassRow, "weights sum to zero");
  }
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    throw Error(ErrorCode::NotNormalized, "weights sum to " + std::to_string(sum));
  }
  if (sum != 1.0) {
    for (double& x : weights) x /= sum;
  }
  return DiscreteDistribution(std::move(weights), true);
}

DiscreteDistribution DiscreteDistribution::pseudo(std::vector<double> weights) {
  check_entries(weights);
  return DiscreteDistribution(std::move(weights), false);
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::ZeroMassRow, "uniform over zero responses");
  return DiscreteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)), true);
}

DiscreteDistribution DiscreteDistribution::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw Error(ErrorCode::InvalidParameter, "point mass index out of range");
  std::vector<double> w(n, 0.0);
  w[index] = 1.0;
  return DiscreteDistribution(std::move(w), true);
}

double DiscreteDistribution::total_mass() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

}  // namespace tabalign
