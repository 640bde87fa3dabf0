#include "tabalign/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tabalign/error.hpp"

namespace tabalign {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

void require_covered(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref) {
  require_same_size(pi.size(), pi_ref.size(), "coverage");
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi_ref[y] == 0.0 && pi[y] > 0.0) {
      throw Error(ErrorCode::UncoveredSupport,
                  "pi puts mass on response " + std::to_string(y) + " where pi_ref has none");
    }
  }
}

}  // namespace

double expected_reward(const DiscreteDistribution& policy, std::span<const double> reward) {
  require_same_size(policy.size(), reward.size(), "expected_reward");
  double acc = 0.0;
  for (std::size_t y = 0; y < reward.size(); ++y) acc += policy[y] * reward[y];
  return acc;
}

double reward_error(const ProblemInstance& instance, std::size_t prompt) {
  const Prompt& p = instance.prompt(prompt);
  double acc = 0.0;
  for (std::size_t y = 0; y < p.response_count(); ++y) {
    const double d = p.reward_model[y] - p.true_reward[y];
    acc += p.base_policy[y] * d * d;
  }
  return acc;
}

double coverage_l1(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref) {
  require_covered(pi, pi_ref);
  double acc = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi[y] > 0.0) acc += pi[y] * (pi[y] / pi_ref[y]);
  }
  return acc;
}

double coverage_inf(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref) {
  require_covered(pi, pi_ref);
  double best = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi[y] > 0.0) best = std::max(best, pi[y] / pi_ref[y]);
  }
  return best;
}

double coverage_alpha(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParameter, "alpha must be a finite value > 1");
  }
  require_covered(pi, pi_ref);
  double acc = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi[y] > 0.0) acc += pi[y] * std::pow(pi[y] / pi_ref[y], alpha - 1.0);
  }
  return acc / alpha;
}

CoverageReport coverage_report(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref,
                               std::span<const double> alphas) {
  CoverageReport r;
  bool covered = true;
  for (std::size_t y = 0; y < std::min(pi.size(), pi_ref.size()); ++y) {
    if (pi_ref[y] == 0.0 && pi[y] > 0.0) covered = false;
  }
  if (!covered) {
    const double inf = std::numeric_limits<double>::infinity();
    r.c_one = r.c_inf = inf;
    for (double a : alphas) r.c_alpha[a] = inf;
    return r;
  }
  r.c_one = coverage_l1(pi, pi_ref);
  r.c_inf = coverage_inf(pi, pi_ref);
  for (double a : alphas) r.c_alpha[a] = coverage_alpha(pi, pi_ref, a);
  return r;
}

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  require_same_size(p.size(), q.size(), "tv_distance");
  double acc = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) acc += std::abs(p[y] - q[y]);
  return 0.5 * acc;
}

double e_m_divergence(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double m) {
  if (!(m >= 1.0)) throw Error(ErrorCode::InvalidParameter, "M must be >= 1");
  require_same_size(pi.size(), pi_ref.size(), "e_m_divergence");
  double acc = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi_ref[y] == 0.0) {
      acc += pi[y];
    } else {
      acc += std::max(pi[y] - m * pi_ref[y], 0.0);
    }
  }
  return acc;
}

double m_star(const DiscreteDistribution& pi, const DiscreteDistribution& pi_ref, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidParameter, "eps must lie in [0, 1]");
  require_same_size(pi.size(), pi_ref.size(), "m_star");

  struct Piece {
    double ratio;
    double target;
    double base;
  };
  std::vector<Piece> pieces;
  double uncovered = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi[y] <= 0.0) continue;
    if (pi_ref[y] == 0.0) {
      uncovered += pi[y];
    } else {
      pieces.push_back({pi[y] / pi_ref[y], pi[y], pi_ref[y]});
    }
  }
  if (uncovered > eps) return std::numeric_limits<double>::infinity();
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.ratio > b.ratio; });

  // On [ratio_{k+1}, ratio_k] only the top k entries overshoot, so
  // E_M = uncovered + P_k − M·Q_k.  Walk down until that segment reaches eps.
  double p_acc = 0.0;
  double q_acc = 0.0;
  std::size_t k = 0;
  while (k < pieces.size()) {
    const double ratio = pieces[k].ratio;
    while (k < pieces.size() && pieces[k].ratio == ratio) {
      p_acc += pieces[k].target;
      q_acc += pieces[k].base;
      ++k;
    }
    const double next = k < pieces.size() ? pieces[k].ratio : 0.0;
    const double at_next = uncovered + p_acc - next * q_acc;
    if (at_next > eps || k == pieces.size()) {
      const double m = (uncovered + p_acc - eps) / q_acc;
      return std::max(1.0, std::min(m, ratio));
    }
  }
  return 1.0;
}

}  // namespace tabalign
