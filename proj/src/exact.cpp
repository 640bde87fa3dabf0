#include "tabalign/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tabalign/divergences.hpp"
#include "tabalign/error.hpp"
#include "tabalign/normalizer.hpp"

namespace tabalign {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidParameter, "beta must be a finite positive value");
  }
}

void check_rewards(const DiscreteDistribution& pi_ref, std::span<const double> reward) {
  if (pi_ref.size() != reward.size()) {
    throw Error(ErrorCode::DimensionMismatch, "policy has " + std::to_string(pi_ref.size()) +
                                                  " entries, reward has " + std::to_string(reward.size()));
  }
}

#ifndef NDEBUG
double bisect_normalizer(const DiscreteDistribution& pi_ref, std::span<const double> reward, double beta) {
  double lo = *std::min_element(reward.begin(), reward.end()) - beta;
  double hi = *std::max_element(reward.begin(), reward.end());
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (relu_mass(reward, pi_ref.weights(), mid, beta) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}
#endif

// (1 − p)^N without losing precision for small p.
double survival_power(double p, std::size_t n) {
  p = std::clamp(p, 0.0, 1.0);
  if (p == 1.0) return 0.0;
  return std::exp(static_cast<double>(n) * std::log1p(-p));
}

}  // namespace

double chi2_objective(const DiscreteDistribution& policy, const DiscreteDistribution& pi_ref,
                      std::span<const double> modeled_reward, double beta) {
  check_beta(beta);
  check_rewards(policy, modeled_reward);
  return expected_reward(policy, modeled_reward) - 0.5 * beta * (coverage_l1(policy, pi_ref) - 1.0);
}

RegularizedSolution exact_chi2_policy(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                      double beta) {
  check_beta(beta);
  check_rewards(pi_ref, modeled_reward);
  RegularizedSolution s;
  s.beta = beta;
  s.lambda = compute_norm_constant_weighted(modeled_reward, pi_ref, beta);
#ifndef NDEBUG
  {
    const double check = bisect_normalizer(pi_ref, modeled_reward, beta);
    const double scale = std::max(1.0, std::abs(check));
    if (std::abs(check - s.lambda) > 1e-12 * scale + 1e-12) {
      throw Error(ErrorCode::InvalidParameter, "normalizer scan disagrees with bisection");
    }
  }
#endif
  std::vector<double> w(pi_ref.size());
  for (std::size_t y = 0; y < w.size(); ++y) {
    w[y] = pi_ref[y] * std::max((modeled_reward[y] - s.lambda) / beta, 0.0);
  }
  s.policy = DiscreteDistribution::normalized(std::move(w));
  s.objective_value = chi2_objective(s.policy, pi_ref, modeled_reward, beta);
  return s;
}

RegularizedSolution exact_chi2_policy(const ProblemInstance& instance, std::size_t prompt, double beta) {
  const Prompt& p = instance.prompt(prompt);
  return exact_chi2_policy(p.base_policy, p.reward_model, beta);
}

DiscreteDistribution exact_kl_policy(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                     double beta) {
  check_beta(beta);
  check_rewards(pi_ref, modeled_reward);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < pi_ref.size(); ++y) {
    if (pi_ref[y] > 0.0) top = std::max(top, modeled_reward[y]);
  }
  std::vector<double> w(pi_ref.size(), 0.0);
  double total = 0.0;
  for (std::size_t y = 0; y < w.size(); ++y) {
    if (pi_ref[y] > 0.0) w[y] = pi_ref[y] * std::exp((modeled_reward[y] - top) / beta);
    total += w[y];
  }
  for (double& v : w) v /= total;
  return DiscreteDistribution::normalized(std::move(w));
}

DiscreteDistribution exact_kl_policy(const ProblemInstance& instance, std::size_t prompt, double beta) {
  const Prompt& p = instance.prompt(prompt);
  return exact_kl_policy(p.base_policy, p.reward_model, beta);
}

DiscreteDistribution exact_bon_law(const DiscreteDistribution& pi_ref, std::span<const double> modeled_reward,
                                   std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "N must be >= 1");
  check_rewards(pi_ref, modeled_reward);
  // Descending priority: higher reward first, lower index first among equals.
  std::vector<std::size_t> order(pi_ref.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (modeled_reward[a] != modeled_reward[b]) return modeled_reward[a] > modeled_reward[b];
    return a < b;
  });
  // y wins iff no draw beats it and at least one draw is y:
  // P(y) = (1 − above)^N − (1 − above − π_ref(y))^N.
  std::vector<double> law(pi_ref.size(), 0.0);
  double above = 0.0;
  for (std::size_t y : order) {
    const double p = pi_ref[y];
    if (p > 0.0) law[y] = survival_power(above, n) - survival_power(above + p, n);
    above += p;
  }
  return DiscreteDistribution::normalized(std::move(law));
}

DiscreteDistribution exact_bon_law(const ProblemInstance& instance, std::size_t prompt, std::size_t n) {
  const Prompt& p = instance.prompt(prompt);
  return exact_bon_law(p.base_policy, p.reward_model, n);
}

SamplerLaw exact_rejection_law(const DiscreteDistribution& target, const DiscreteDistribution& pi_ref, double m,
                               std::size_t n) {
  if (!(m >= 1.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidParameter, "M must be finite and >= 1");
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "N must be >= 1");
  if (target.size() != pi_ref.size()) throw Error(ErrorCode::DimensionMismatch, "target and pi_ref differ in size");

  std::vector<double> clipped(target.size());
  double accepted = 0.0;
  for (std::size_t y = 0; y < clipped.size(); ++y) {
    clipped[y] = std::min(target[y], m * pi_ref[y]);
    accepted += clipped[y];
  }
  SamplerLaw out;
  out.accepted_mass = accepted;
  if (!(accepted > 0.0)) {
    out.law = pi_ref;
    out.fallback_probability = 1.0;
    out.degenerate = true;
    return out;
  }
  const double q = survival_power(accepted / m, n);
  out.fallback_probability = q;
  std::vector<double> law(clipped.size());
  for (std::size_t y = 0; y < law.size(); ++y) law[y] = (1.0 - q) * clipped[y] / accepted + q * pi_ref[y];
  out.law = DiscreteDistribution::normalized(std::move(law));
  return out;
}

double normalizer_mass(const Prompt& prompt, double lambda, double beta) {
  return relu_mass(prompt.reward_model, prompt.base_policy.weights(), lambda, beta);
}

SamplerLaw exact_itp_law(const ProblemInstance& instance, std::size_t prompt, double beta, double lambda_hat,
                         std::size_t n) {
  check_beta(beta);
  const double cap = instance.reward_cap();
  if (!(lambda_hat >= -beta && lambda_hat <= cap - beta)) {
    throw Error(ErrorCode::InvalidParameter, "lambda_hat must lie in [-beta, r_max - beta]");
  }
  const Prompt& p = instance.prompt(prompt);
  std::vector<double> target(p.response_count());
  for (std::size_t y = 0; y < target.size(); ++y) {
    target[y] = p.base_policy[y] * std::max((p.reward_model[y] - lambda_hat) / beta, 0.0);
  }
  // M >= 1 on the admissible range; the clamp only absorbs rounding.
  return exact_rejection_law(DiscreteDistribution::pseudo(std::move(target)), p.base_policy,
                             std::max(1.0, (cap - lambda_hat) / beta), n);
}

double regret(const ProblemInstance& instance, std::size_t prompt, const DiscreteDistribution& comparator,
              const DiscreteDistribution& achieved) {
  const Prompt& p = instance.prompt(prompt);
  return expected_reward(comparator, p.true_reward) - expected_reward(achieved, p.true_reward);
}

SkylineBound skyline_bound(double c_star, double eps_rm) {
  if (!(c_star >= 1.0) || !(eps_rm >= 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "skyline bound needs C* >= 1 and eps >= 0");
  }
  return {0.25 * std::sqrt(c_star * eps_rm * eps_rm), c_star >= 16.0};
}

}  // namespace tabalign
