#include "tabalign/verify/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>

#include "tabalign/algorithms.hpp"
#include "tabalign/divergences.hpp"
#include "tabalign/exact.hpp"
#include "tabalign/experiments.hpp"
#include "tabalign/fixtures.hpp"
#include "tabalign/normalizer.hpp"
#include "tabalign/oracle.hpp"
#include "tabalign/records.hpp"
#include "tabalign/verify/oracles.hpp"

namespace tabalign::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

ProblemInstance single_prompt(std::vector<double> weights, std::vector<double> modeled, std::vector<double> truth,
                              double cap = 1.0) {
  InstanceSpec spec;
  spec.reward_cap = cap;
  spec.prompts.push_back({"x0", std::move(weights), std::move(modeled), std::move(truth), std::nullopt});
  return build_tabular_instance(spec);
}

// ---------------------------------------------------------------------------

CriterionResult normalizer_exactness(const AcceptanceOptions&) {
  constexpr int kInputs = 10000;
  constexpr double kTol = 1e-9;
  constexpr std::size_t kMaxN = 100000;
  constexpr std::size_t kTimingN = 1000000;
  constexpr double kTimingLimit = 5.0;

  CriterionResult r{1, "normalizer exactness", false, "", 0.0};
  Sampler s(derive_key(0xacce, 1));
  double worst_phi = 0.0;
  double worst_lambda = 0.0;
  std::vector<double> rewards;
  for (int t = 0; t < kInputs; ++t) {
    const auto n = static_cast<std::size_t>(std::floor(s.log_uniform(1.0, static_cast<double>(kMaxN) + 1.0)));
    const double beta = s.log_uniform(0.01, 10.0);
    const double cap = s.uniform(1.0, 10.0);
    // A third of the inputs sit on a coarse grid so that buckets repeat.
    const bool gridded = t % 3 == 0;
    rewards.resize(n);
    for (double& v : rewards) v = gridded ? cap * static_cast<double>(s.index(9)) / 8.0 : s.uniform(0.0, cap);
    const double lambda = compute_norm_constant_empirical(rewards, beta);
    const std::vector<double> w(n, 1.0);
    const double phi = static_cast<double>(relu_mass_ld(rewards, w, lambda, beta) / static_cast<long double>(n));
    const double reference = bisect_normalizer(rewards, w, beta, static_cast<double>(n));
    worst_phi = std::max(worst_phi, std::abs(phi - 1.0));
    worst_lambda = std::max(worst_lambda, std::abs(lambda - reference));
  }

  rewards.resize(kTimingN);
  for (double& v : rewards) v = s.uniform();
  const auto t0 = Clock::now();
  const double lambda = compute_norm_constant_empirical(rewards, 0.5);
  const double elapsed = seconds_since(t0);
  const double phi_big = empirical_relu_mass(rewards, lambda, 0.5);

  r.passed = worst_phi <= kTol && worst_lambda <= kTol && elapsed < kTimingLimit && std::abs(phi_big - 1.0) <= kTol;
  r.detail = fmt("max|Phi-1|=%.3g max|lambda-bisect|=%.3g over %d inputs; N=1e6 in %.3f s", worst_phi,
                 worst_lambda, kInputs, elapsed);
  return r;
}

CriterionResult kkt_optimality(const AcceptanceOptions&) {
  constexpr int kInstances = 100;
  constexpr int kRandomPoints = 10000;
  constexpr int kPerturbations = 10000;
  constexpr double kTol = 1e-8;

  CriterionResult r{2, "chi-squared KKT optimality", false, "", 0.0};
  Sampler s(derive_key(0xacce, 2));
  int losses = 0;
  int out_of_range = 0;
  double worst_gap = -1e300;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t k = 2 + s.index(5);
    const double cap = s.uniform(1.0, 4.0);
    const double beta = s.log_uniform(0.01, 10.0);
    const auto base = DiscreteDistribution::normalized(s.simplex(k));
    std::vector<double> reward(k);
    for (double& v : reward) v = s.uniform(0.0, cap);
    const RegularizedSolution sol = exact_chi2_policy(base, reward, beta);
    if (!(sol.lambda >= -beta && sol.lambda <= cap - beta)) ++out_of_range;
    const std::vector<double> pi(sol.policy.begin(), sol.policy.end());
    const std::vector<double> ref(base.begin(), base.end());
    const double best = chi2_objective_direct(pi, ref, reward, beta);

    auto compare = [&](const std::vector<double>& q) {
      const double v = chi2_objective_direct(q, ref, reward, beta);
      worst_gap = std::max(worst_gap, v - best);
      if (v > best + kTol) ++losses;
    };
    for (int i = 0; i < kRandomPoints; ++i) compare(s.simplex(k));
    std::vector<double> q(k);
    for (int i = 0; i < kPerturbations; ++i) {
      const double step = s.log_uniform(1e-9, 1e-2);
      const auto dir = s.simplex(k);
      for (std::size_t y = 0; y < k; ++y) q[y] = (1.0 - step) * pi[y] + step * dir[y];
      compare(q);
    }
  }
  r.passed = losses == 0 && out_of_range == 0;
  r.detail = fmt("%d instances; competitors beating the solver by >1e-8: %d; max(competitor-solver)=%.3g; "
                 "lambda outside [-beta, Rmax-beta]: %d",
                 kInstances, losses, worst_gap, out_of_range);
  return r;
}

CriterionResult bon_equivalence(const AcceptanceOptions&) {
  constexpr int kInstances = 50;
  constexpr double kTol = 1e-12;
  constexpr std::size_t kReplicates = 100000;
  constexpr double kSigmas = 3.0;
  constexpr int kRandomMc = 10;

  CriterionResult r{3, "best-of-N law equivalence", false, "", 0.0};
  Sampler s(derive_key(0xacce, 3));
  double worst = 0.0;
  std::vector<ProblemInstance> mc_instances;
  std::vector<std::size_t> mc_n;
  mc_instances.push_back(single_prompt({0.5, 0.5}, {1.0, 0.0}, {1.0, 0.0}));
  mc_n.push_back(2);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t k = 1 + s.index(4);
    const std::size_t n = 1 + s.index(4);
    auto weights = s.simplex(k);
    std::vector<double> reward(k);
    // Rewards from a three-level set so that ties are common.
    for (double& v : reward) v = 0.5 * static_cast<double>(s.index(3));
    const auto base = DiscreteDistribution::normalized(weights);
    const auto law = exact_bon_law(base, reward, n);
    const auto brute = enumerate_bon_law(base.weights(), reward, n);
    for (std::size_t y = 0; y < k; ++y) worst = std::max(worst, std::abs(law[y] - brute[y]));
    if (t < kRandomMc) {
      mc_instances.push_back(single_prompt(std::vector<double>(base.begin(), base.end()), reward, reward));
      mc_n.push_back(n);
    }
  }

  double worst_z = 0.0;
  for (std::size_t i = 0; i < mc_instances.size(); ++i) {
    const ProblemInstance& inst = mc_instances[i];
    const auto law = exact_bon_law(inst, 0, mc_n[i]);
    const auto& reward = inst.prompt(0).reward_model;
    const double mean = expected_reward(law, reward);
    double var = 0.0;
    for (std::size_t y = 0; y < reward.size(); ++y) var += law[y] * (reward[y] - mean) * (reward[y] - mean);
    double acc = 0.0;
    for (std::size_t rep = 0; rep < kReplicates; ++rep) {
      OracleSession session(inst, 0, derive_key(0xb0, i, rep));
      acc += reward[best_of_n(session, mc_n[i]).chosen_response];
    }
    const double se = std::sqrt(var / static_cast<double>(kReplicates));
    const double diff = std::abs(acc / static_cast<double>(kReplicates) - mean);
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, z);
  }
  r.passed = worst <= kTol && worst_z <= kSigmas;
  r.detail = fmt("max|exact-enumeration|=%.3g on %d instances; Monte-Carlo worst |z|=%.2f on %zu instances x %zu "
                 "replicates",
                 worst, kInstances, worst_z, mc_instances.size(), kReplicates);
  return r;
}

CriterionResult rejection_tv_bound(const AcceptanceOptions&) {
  constexpr int kInstances = 20;
  constexpr int kGrid = 10;
  constexpr double kMaxM = 100.0;
  constexpr double kMaxN = 1000.0;
  constexpr double kTimeLimit = 1.0;

  CriterionResult r{4, "rejection-sampling TV bound", false, "", 0.0};
  const auto t0 = Clock::now();
  Sampler s(derive_key(0xacce, 4));
  int violations = 0;
  int corrected_violations = 0;
  double worst_excess = -1e300;
  std::string first;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t k = 2 + s.index(7);
    const auto base = DiscreteDistribution::normalized(s.simplex(k));
    const auto target = DiscreteDistribution::normalized(s.simplex(k));
    for (int i = 0; i < kGrid; ++i) {
      const double m = std::pow(kMaxM, static_cast<double>(i) / (kGrid - 1));
      const double em = e_m_divergence(target, base, m);
      for (int j = 0; j < kGrid; ++j) {
        const auto n = static_cast<std::size_t>(std::llround(std::pow(kMaxN, static_cast<double>(j) / (kGrid - 1))));
        const auto law = exact_rejection_law(target, base, m, n);
        const double tv = tv_distance(target, law.law);
        const double tail = std::exp(-static_cast<double>(n) * (1.0 - em) / m);
        const double bound = em + 0.5 * tail;
        worst_excess = std::max(worst_excess, tv - bound);
        if (tv > bound) {
          if (violations++ == 0) first = fmt("instance %d, M=%.4g, N=%zu: TV=%.6g > %.6g", t, m, n, tv, bound);
        }
        if (tv > em + tail) ++corrected_violations;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  r.passed = violations == 0 && elapsed < kTimeLimit;
  r.detail = fmt("%d of %d cells violate TV <= E_M + 0.5 exp(-N(1-E_M)/M), max excess %.4g",
                 violations, kInstances * kGrid * kGrid, worst_excess);
  if (!first.empty()) r.detail += " (first: " + first + ")";
  r.detail += fmt("; without the 1/2 factor: %d violations; %.3f s", corrected_violations, elapsed);
  return r;
}

CriterionResult overoptimization_curve(const AcceptanceOptions& options) {
  constexpr double kEps = 0.05;
  constexpr double kCoverage = 4096.0;
  constexpr std::size_t kLargeN = 4096;
  constexpr std::size_t kSmallN = 16;
  constexpr std::size_t kItpSmallN = 256;
  constexpr std::size_t kReplicates = 10000;
  constexpr double kTimeLimit = 60.0;

  CriterionResult r{5, "overoptimization curve", false, "", 0.0};
  const auto t0 = Clock::now();
  ConeParams params;
  params.coverage = kCoverage;
  params.truncation_tail = 1e-9;
  params.variant = ConeVariant::Part2;
  params.eps_rm = kEps;
  params.n = kLargeN;
  const LowerBoundFixture fx = build_cone_lower_instance(params);
  const ProblemInstance& inst = fx.instance;
  const DiscreteDistribution& comp = fx.comparator.per_prompt[0];

  const double bound = (1.0 - std::exp(-3.0)) * std::sqrt(static_cast<double>(kLargeN) * kEps * kEps / 32.0);
  const double bon_large = regret(inst, 0, comp, exact_bon_law(inst, 0, kLargeN));
  const double bon_small = regret(inst, 0, comp, exact_bon_law(inst, 0, kSmallN));

  const double c_one = coverage_l1(comp, inst.prompt(0).base_policy);
  const double beta = std::sqrt(reward_error(inst, 0) / c_one);
  AlgorithmParams itp;
  itp.algorithm = Algorithm::Itp;
  itp.beta = beta;
  itp.sample_mode = SampleMode::Reuse;
  itp.n = kItpSmallN;
  const Estimate small = estimate_regret_mc(inst, 0, itp, kReplicates, derive_key(0xacce, 5, 1), false,
                                            options.threads);
  itp.n = kLargeN;
  const Estimate large = estimate_regret_mc(inst, 0, itp, kReplicates, derive_key(0xacce, 5, 2), false,
                                            options.threads);
  const double slack = 2.0 * std::hypot(small.standard_error, large.standard_error);
  const double elapsed = seconds_since(t0);

  r.passed = bon_large >= bound && bon_large > bon_small && large.mean <= small.mean + slack && elapsed < kTimeLimit;
  r.detail = fmt("BoN regret N=%zu: %.4f (bound %.4f), N=%zu: %.4f; ITP beta=%.4g regret N=%zu: %.4f+-%.4f, "
                 "N=%zu: %.4f+-%.4f; %.1f s",
                 kLargeN, bon_large, bound, kSmallN, bon_small, beta, kItpSmallN, small.mean, small.standard_error,
                 kLargeN, large.mean, large.standard_error, elapsed);
  return r;
}

CriterionResult small_n_impossibility(const AcceptanceOptions&) {
  constexpr double kCoverage = 64.0;
  constexpr double kEps = 0.05;
  constexpr std::size_t kN = 16;

  CriterionResult r{6, "small-N impossibility", false, "", 0.0};
  const LowerBoundFixture fx = build_cinf_lower_instance(kCoverage, kN, kEps, CinfVariant::SmallN);
  const double achieved = regret(fx.instance, 0, fx.comparator.per_prompt[0], exact_bon_law(fx.instance, 0, kN));
  const double threshold = std::min(2.0 * std::sqrt(kCoverage * kEps * kEps), 1.0);
  // No selection rule can beat 1 − P(y* among the N draws) here.
  const double best_possible = std::pow(1.0 - 1.0 / kCoverage, static_cast<double>(kN));
  r.passed = achieved > threshold;
  r.detail = fmt("exact BoN regret %.6f vs threshold %.4f (best achievable by any selection rule: %.6f)", achieved,
                 threshold, best_possible);
  return r;
}

CriterionResult lambda_concentration(const AcceptanceOptions&) {
  constexpr double kCap = 1.0;
  constexpr double kBeta = 0.5;
  constexpr double kDelta = 0.05;
  constexpr std::size_t kExpectedN = 1121;
  constexpr std::size_t kTrials = 200;
  constexpr double kMinFraction = 0.9;
  constexpr double kTimeLimit = 10.0;

  CriterionResult r{7, "normalizer concentration", false, "", 0.0};
  const auto t0 = Clock::now();
  const std::size_t n = prescribed_sample_size(kCap, kBeta, kDelta);
  std::vector<double> modeled(8);
  for (std::size_t y = 0; y < modeled.size(); ++y) modeled[y] = static_cast<double>(y) / 7.0;
  const ProblemInstance inst =
      single_prompt(std::vector<double>(8, 0.125), modeled, modeled, kCap);
  const auto res = lambda_concentration_trial(inst, 0, kBeta, n, kTrials, derive_key(0xacce, 7));
  const double elapsed = seconds_since(t0);
  r.passed = n == kExpectedN && res.fraction >= kMinFraction && elapsed < kTimeLimit;
  const auto [lo, hi] = std::minmax_element(res.masses.begin(), res.masses.end());
  r.detail = fmt("N=%zu; Phi(lambda_hat) in [1/2, 3/2] in %.3f of %zu trials (range %.4f..%.4f); %.2f s", n,
                 res.fraction, kTrials, *lo, *hi, elapsed);
  return r;
}

CriterionResult m_star_bounds(const AcceptanceOptions&) {
  constexpr int kInstances = 100;
  constexpr double kTol = 1e-12;
  constexpr double kAlphas[] = {1.5, 2.0, 3.0};

  CriterionResult r{8, "E_M divergence bounds", false, "", 0.0};
  Sampler s(derive_key(0xacce, 8));
  int failures = 0;
  double worst_excess = -1e300;
  double worst_at_cinf = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t k = 2 + s.index(9);
    const auto base = DiscreteDistribution::normalized(s.simplex(k));
    const auto pi = DiscreteDistribution::normalized(s.simplex(k));
    const double eps = s.log_uniform(1e-3, 1.0);
    for (double alpha : kAlphas) {
      const double c_alpha = coverage_alpha(pi, base, alpha);
      const double m = std::max(1.0, std::pow(c_alpha / eps, 1.0 / (alpha - 1.0)));
      const double em = e_m_divergence(pi, base, m);
      worst_excess = std::max(worst_excess, em - eps);
      if (em > eps + kTol) ++failures;
    }
    const double at_cinf = e_m_divergence(pi, base, std::max(1.0, coverage_inf(pi, base)));
    worst_at_cinf = std::max(worst_at_cinf, at_cinf);
    if (at_cinf > kTol) ++failures;
  }
  r.passed = failures == 0;
  r.detail = fmt("%d instances x alpha in {1.5,2,3}: max(E_M - eps)=%.3g, max E_Cinf=%.3g, failures %d", kInstances,
                 worst_excess, worst_at_cinf, failures);
  return r;
}

CriterionResult skyline(const AcceptanceOptions&) {
  constexpr int kInstances = 50;
  constexpr double kErrTol = 1e-12;
  constexpr double kRegretTol = 1e-10;

  CriterionResult r{9, "skyline construction", false, "", 0.0};
  Sampler s(derive_key(0xacce, 9));
  double worst_err = -1e300;
  double worst_identity = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t k = 2 + s.index(7);
    const auto base = DiscreteDistribution::normalized(s.simplex(k));
    const auto comp = DiscreteDistribution::normalized(s.simplex(k));
    const auto cand = DiscreteDistribution::normalized(s.simplex(k));
    const double eps = s.uniform(0.01, 0.5);
    const SkylineFixture fx = build_skyline_instance(base, comp, cand, eps);
    worst_err = std::max(worst_err, reward_error(fx.instance, 0) - eps * eps);
    double spread = 0.0;
    for (std::size_t y = 0; y < k; ++y) spread += (comp[y] - cand[y]) * (comp[y] - cand[y]) / base[y];
    const double measured = regret(fx.instance, 0, comp, cand) / fx.reward_scale;
    worst_identity = std::max(worst_identity, std::abs(measured - eps * std::sqrt(spread)));
  }
  r.passed = worst_err <= kErrTol && worst_identity <= kRegretTol;
  r.detail = fmt("%d instances: max(error - eps^2)=%.3g, max|regret - eps*sqrt(chi)|=%.3g", kInstances, worst_err,
                 worst_identity);
  return r;
}

CriterionResult determinism(const AcceptanceOptions&) {
  CriterionResult r{10, "schedule-independent sweeps", false, "", 0.0};
  const ProblemInstance inst = single_prompt({0.3, 0.5, 0.2}, {1.0, 0.4, 0.0}, {0.2, 0.9, 0.0});
  SweepConfig config;
  config.algorithms = {Algorithm::Reference, Algorithm::BestOfN, Algorithm::Itp};
  config.n_grid = {1, 4, 16, 64};
  config.beta_grid = {0.25, 1.0};
  config.replicates = 200;
  config.seed = 2024;
  config.threads = 1;
  const std::string one = content_checksum(render_records(sweep_n(inst, config), OutputFormat::Csv));
  config.threads = 4;
  const std::string four = content_checksum(render_records(sweep_n(inst, config), OutputFormat::Csv));
  r.passed = one == four;
  r.detail = "checksum threads=1 " + one + ", threads=4 " + four;
  return r;
}

using Check = CriterionResult (*)(const AcceptanceOptions&);

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  static constexpr Check kChecks[] = {normalizer_exactness,  kkt_optimality, bon_equivalence, rejection_tv_bound,
                                      overoptimization_curve, small_n_impossibility, lambda_concentration,
                                      m_star_bounds,          skyline,        determinism};
  std::vector<CriterionResult> out;
  for (int id = 1; id <= static_cast<int>(std::size(kChecks)); ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    const auto t0 = Clock::now();
    CriterionResult res;
    try {
      res = kChecks[id - 1](options);
    } catch (const std::exception& e) {
      res.id = id;
      res.title = "criterion " + std::to_string(id);
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = seconds_since(t0);
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt("%s %2d %-32s (%6.2f s) ", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds) + r.detail;
}

}  // namespace tabalign::verify
