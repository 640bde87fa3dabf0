#include "tabalign/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tabalign/error.hpp"
#include "tabalign/normalizer.hpp"

namespace tabalign {

namespace {

void check_n(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "N must be >= 1");
}

// True if a outranks b: higher r̂, then lower index.
bool outranks(const Draw& a, const Draw& b) {
  if (a.modeled_reward != b.modeled_reward) return a.modeled_reward > b.modeled_reward;
  return a.response < b.response;
}

std::size_t best_index(const std::vector<Draw>& draws) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < draws.size(); ++i) {
    if (outranks(draws[i], draws[best])) best = i;
  }
  return draws[best].response;
}

bool accept(OracleSession& session, double weight, double m) {
  const double p = std::min(weight / m, 1.0);
  if (!(p > 0.0)) return false;
  return session.coin() <= p;
}

}  // namespace

AlignmentOutcome best_of_n(OracleSession& session, std::size_t n) {
  check_n(n);
  const auto start = session.queries_used();
  AlignmentOutcome out;
  out.chosen_response = best_index(session.draw_batch(n));
  out.queries_used = session.queries_used() - start;
  return out;
}

AlignmentOutcome rejection_sampling(OracleSession& session, const WeightFn& weight, double m, std::size_t n) {
  check_n(n);
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidParameter, "M must be positive");
  const auto start = session.queries_used();
  AlignmentOutcome out;
  for (std::size_t i = 1; i <= n; ++i) {
    const Draw d = session.draw_one();
    if (accept(session, weight(d), m)) {
      out.chosen_response = d.response;
      out.accepted_at = i;
      out.queries_used = session.queries_used() - start;
      return out;
    }
  }
  out.chosen_response = session.draw_one().response;
  out.fallback_used = true;
  out.queries_used = session.queries_used() - start;
  return out;
}

AlignmentOutcome inference_time_pessimism(OracleSession& session, const ItpOptions& options) {
  check_n(options.n);
  const double beta = options.beta;
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidParameter, "beta must be positive");
  const auto start = session.queries_used();

  const std::vector<Draw> sample = session.draw_batch(options.n);
  double lambda = 0.0;
  if (options.lambda_override) {
    lambda = *options.lambda_override;
  } else {
    std::vector<double> rewards(sample.size());
    std::transform(sample.begin(), sample.end(), rewards.begin(), [](const Draw& d) { return d.modeled_reward; });
    lambda = compute_norm_constant_empirical(rewards, beta);
  }
  const double m = (session.reward_cap() - lambda) / beta;
  auto weight = [&](const Draw& d) { return std::max((d.modeled_reward - lambda) / beta, 0.0); };

  AlignmentOutcome out;
  out.lambda_hat = lambda;
  const bool fresh = options.mode == SampleMode::Fresh;
  for (std::size_t i = 0; i < options.n; ++i) {
    const Draw d = fresh ? session.draw_one() : sample[i];
    if (accept(session, weight(d), m)) {
      out.chosen_response = d.response;
      out.accepted_at = i + 1;
      out.queries_used = session.queries_used() - start;
      return out;
    }
  }
  out.fallback_used = true;
  out.chosen_response =
      options.fallback == ItpFallback::BestOfN ? best_index(sample) : session.draw_one().response;
  out.queries_used = session.queries_used() - start;
  return out;
}

}  // namespace tabalign
