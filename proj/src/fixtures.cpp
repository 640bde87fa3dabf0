#include "tabalign/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tabalign/error.hpp"

namespace tabalign {

namespace {

struct ShiftedRewards {
  std::vector<double> modeled;
  std::vector<double> truth;
  double shift = 0.0;
  double cap = 1.0;
};

// Shift both reward functions by one constant so the smaller is nonnegative;
// widen the cap if the shifted maximum exceeds it.  Regret differences are
// unchanged.
ShiftedRewards shift_into_range(std::vector<double> modeled, std::vector<double> truth,
                                double cap) {
  double lo = 0.0;
  double hi = 0.0;
  for (double v : modeled) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : truth) lo = std::min(lo, v), hi = std::max(hi, v);
  ShiftedRewards out;
  out.shift = -lo;
  for (double& v : modeled) v += out.shift;
  for (double& v : truth) v += out.shift;
  out.cap = std::max(cap, hi + out.shift);
  out.modeled = std::move(modeled);
  out.truth = std::move(truth);
  return out;
}

LowerBoundFixture single_prompt(std::string id, const DiscreteDistribution& base,
                                const DiscreteDistribution& comparator, ShiftedRewards rewards) {
  InstanceSpec spec;
  spec.reward_cap = rewards.cap;
  PromptSpec p;
  p.id = std::move(id);
  p.weights.assign(base.begin(), base.end());
  p.reward_model = std::move(rewards.modeled);
  p.true_reward = std::move(rewards.truth);
  p.comparator = std::vector<double>(comparator.begin(), comparator.end());
  spec.prompts.push_back(std::move(p));
  LowerBoundFixture fx{build_tabular_instance(spec), {}, rewards.shift};
  fx.comparator.per_prompt.push_back(*fx.instance.prompt(0).comparator);
  return fx;
}

}  // namespace

LowerBoundFixture build_cinf_lower_instance(double coverage, std::size_t n, double eps_rm,
                                            CinfVariant variant, double reward_cap) {
  if (!(coverage >= 1.0)) throw Error(ErrorCode::InvalidParameter, "C must be >= 1");
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "N must be positive");
  if (!(eps_rm >= 0.0 && eps_rm <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "eps_rm must lie in [0, 1]");
  }
  const double p_bad = 1.0 / (2.0 * static_cast<double>(n));
  const double p_star = 1.0 / coverage;
  const double p_zero = 1.0 - p_bad - p_star;
  if (p_zero < 0.0) {
    throw Error(ErrorCode::InfeasibleFixture,
                "pi_ref(y0) = 1 - 1/(2N) - 1/C = " + std::to_string(p_zero) + " < 0");
  }
  const double eps2 = eps_rm * eps_rm;
  std::vector<double> modeled(3, 0.0);
  std::vector<double> truth{0.0, 1.0, 0.0};
  if (variant == CinfVariant::SmallN) {
    modeled[1] = 1.0 - std::min(std::sqrt(coverage * eps2), 1.0);
  } else {
    const double gap = std::min(1.0, std::sqrt(static_cast<double>(n) * eps2));
    truth[2] = 1.0 - gap;
    modeled[1] = 1.0 - std::min(std::sqrt(coverage / 2.0 * eps2), 1.0);
    modeled[2] = 1.0;
  }
  const auto base = DiscreteDistribution::normalized({p_zero, p_star, p_bad});
  const auto comparator = DiscreteDistribution::point_mass(3, 1);
  return single_prompt("cinf", base, comparator,
                       shift_into_range(std::move(modeled), std::move(truth), reward_cap));
}

ConePolicies cone_policies(double coverage, double truncation_tail, std::size_t min_length) {
  if (!(coverage > 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "C must exceed 1 so that I = ceil(log2 C) >= 1");
  }
  if (!(truncation_tail > 0.0 && truncation_tail <= 1e-6)) {
    throw Error(ErrorCode::InvalidParameter, "truncation_tail must lie in (0, 1e-6]");
  }
  const int sat = static_cast<int>(std::ceil(std::log2(coverage)));
  // π_ref mass beyond index i is 4^{-i}; keep indices 1..len.
  std::size_t len = 1;
  while (std::ldexp(1.0, -2 * static_cast<int>(len)) >= truncation_tail) ++len;
  len = std::max({len, static_cast<std::size_t>(sat) + 1, min_length});

  std::vector<double> base(len);
  std::vector<double> comp(len);
  for (std::size_t k = 0; k < len; ++k) {
    const int i = static_cast<int>(k) + 1;
    base[k] = 3.0 * std::ldexp(1.0, -2 * i);
    comp[k] = i <= sat ? std::ldexp(1.0, -i) : 3.0 * std::ldexp(1.0, sat - 2 * i);
  }
  const int last = static_cast<int>(len);
  base.back() += std::ldexp(1.0, -2 * last);
  comp.back() += std::ldexp(1.0, sat - 2 * last);
  return {DiscreteDistribution::normalized(std::move(base)),
          DiscreteDistribution::normalized(std::move(comp)), sat};
}

LowerBoundFixture build_cone_lower_instance(const ConeParams& params) {
  const double eps = params.eps_rm;
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidParameter, "eps must lie in (0, 1]");
  if (params.coverage < 1.0 / (2.0 * eps)) {
    throw Error(ErrorCode::InvalidParameter, "C must be at least 1/(2 eps)");
  }
  const double eps2 = eps * eps;

  if (params.variant == ConeVariant::Part1) {
    const double tol = params.tolerance.value_or(eps);
    if (!(tol > 0.0) || !(params.exponent > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "tolerance and exponent must be positive");
    }
    ConePolicies pol = cone_policies(params.coverage, params.truncation_tail);
    double c_one = 0.0;
    for (std::size_t k = 0; k < pol.base.size(); ++k) c_one += pol.comparator[k] * pol.comparator[k] / pol.base[k];
    const int k_eps = static_cast<int>(std::floor(-params.exponent * std::log2(c_one * tol * tol)));
    if (k_eps < 1 || k_eps > pol.saturation_index) {
      throw Error(ErrorCode::InfeasibleFixture,
                  "k_eps = " + std::to_string(k_eps) + " outside [1, I]");
    }
    pol = cone_policies(params.coverage, params.truncation_tail, static_cast<std::size_t>(k_eps) + 1);
    const double unit = std::sqrt(eps2 / (4.0 * k_eps));
    const double gap_k = std::ldexp(unit, k_eps);
    std::vector<double> modeled(pol.base.size());
    std::vector<double> truth(pol.base.size());
    for (std::size_t k = 0; k < modeled.size(); ++k) {
      const int i = static_cast<int>(k) + 1;
      if (i < k_eps) {
        truth[k] = 0.0;
        modeled[k] = std::ldexp(unit, i);
      } else {
        truth[k] = 0.5 + gap_k / 2.0;
        modeled[k] = 0.5 - gap_k / 2.0;
      }
    }
    return single_prompt("cone-part1", pol.base, pol.comparator,
                         shift_into_range(std::move(modeled), std::move(truth), params.reward_cap));
  }

  if (params.n < 4) throw Error(ErrorCode::InvalidParameter, "Part2 needs N >= 4 so that k_N >= 1");
  int k_n = 0;
  while (std::ldexp(1.0, 2 * (k_n + 1)) <= static_cast<double>(params.n)) ++k_n;
  ConePolicies pol = cone_policies(params.coverage, params.truncation_tail, static_cast<std::size_t>(k_n) + 1);
  if (k_n > pol.saturation_index) {
    throw Error(ErrorCode::InfeasibleFixture,
                "k_N = floor(log4 N) = " + std::to_string(k_n) + " exceeds I = ceil(log2 C)");
  }
  const double unit = std::sqrt(eps2 / (8.0 * k_n));
  const double spread = std::sqrt(static_cast<double>(k_n)) * std::ldexp(unit, k_n);
  std::vector<double> modeled(pol.base.size());
  std::vector<double> truth(pol.base.size());
  for (std::size_t k = 0; k < modeled.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    if (i < k_n) {
      const double gap = std::ldexp(unit, i);
      truth[k] = 0.5 + gap / 2.0;
      modeled[k] = 0.5 - gap / 2.0;
    } else if (i == k_n) {
      truth[k] = 0.5 - spread / 2.0;
      modeled[k] = 0.5 + spread / 2.0;
    } else {
      truth[k] = 0.5 + spread / 2.0;
      modeled[k] = 0.5 - spread / 2.0;
    }
  }
  return single_prompt("cone-part2", pol.base, pol.comparator,
                       shift_into_range(std::move(modeled), std::move(truth), params.reward_cap));
}

SkylineFixture build_skyline_instance(const DiscreteDistribution& base,
                                      const DiscreteDistribution& comparator,
                                      const DiscreteDistribution& candidate, double eps,
                                      double reward_cap) {
  const std::size_t n = base.size();
  if (comparator.size() != n || candidate.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "skyline policies differ in size");
  }
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidParameter, "eps must be nonnegative");
  double chi = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    const double diff = comparator[y] - candidate[y];
    if (base[y] == 0.0) {
      if (diff != 0.0) {
        throw Error(ErrorCode::UncoveredSupport,
                    "pi_ref(" + std::to_string(y) + ") = 0 where pi* and pi_hat differ");
      }
      continue;
    }
    chi += diff * diff / base[y];
  }
  std::vector<double> truth(n, 0.0);
  if (chi > 0.0) {
    const double norm = std::sqrt(chi);
    for (std::size_t y = 0; y < n; ++y) {
      if (base[y] > 0.0) truth[y] = eps * (comparator[y] - candidate[y]) / base[y] / norm;
    }
  }
  ShiftedRewards shifted = shift_into_range(std::vector<double>(n, 0.0), std::move(truth), reward_cap);
  double scale = 1.0;
  if (shifted.cap > reward_cap) {
    scale = reward_cap / shifted.cap;
    for (double& v : shifted.modeled) v *= scale;
    for (double& v : shifted.truth) v *= scale;
    shifted.cap = reward_cap;
  }
  InstanceSpec spec;
  spec.reward_cap = reward_cap;
  PromptSpec p;
  p.id = "skyline";
  p.weights.assign(base.begin(), base.end());
  p.reward_model = std::move(shifted.modeled);
  p.true_reward = std::move(shifted.truth);
  for (double& v : p.true_reward) v = std::clamp(v, 0.0, reward_cap);
  p.comparator = std::vector<double>(comparator.begin(), comparator.end());
  spec.prompts.push_back(std::move(p));
  return {build_tabular_instance(spec), comparator, candidate, shifted.shift, scale};
}

}  // namespace tabalign
