#include "tabalign/oracle.hpp"

#include <algorithm>
#include <limits>

#include "tabalign/error.hpp"

namespace tabalign {

namespace {

std::uint64_t session_key(const Prompt& p, std::uint64_t seed) {
  return derive_key(seed, hash_string(p.id.data(), p.id.size()));
}

}  // namespace

OracleSession::OracleSession(const ProblemInstance& instance, std::size_t prompt, std::uint64_t seed)
    : instance_(&instance),
      data_(&instance.prompt(prompt)),
      prompt_(prompt),
      draws_(session_key(*data_, seed), 0),
      coins_(session_key(*data_, seed), 1) {
  const auto w = data_->base_policy.weights();
  cumulative_.resize(w.size());
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cumulative_[i] = acc;
    if (w[i] > 0.0) last_positive = i;
  }
  // Round-off must not leave u = 1 without a home.
  for (std::size_t i = last_positive; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
}

Draw OracleSession::draw_one() {
  const double u = draws_.uniform_open_closed();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto y = static_cast<std::size_t>(it - cumulative_.begin());
  if (queries_ != std::numeric_limits<std::uint64_t>::max()) ++queries_;
  return {y, data_->base_policy[y], data_->reward_model[y]};
}

std::vector<Draw> OracleSession::draw_batch(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "draw_batch needs n >= 1");
  std::vector<Draw> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_one());
  return out;
}

OracleSession open_session(const ProblemInstance& instance, const std::string& prompt_id,
                           std::uint64_t seed) {
  return OracleSession(instance, instance.prompt_index(prompt_id), seed);
}

OracleSession open_session(const ProblemInstance& instance, std::size_t prompt, std::uint64_t seed) {
  return OracleSession(instance, prompt, seed);
}

}  // namespace tabalign
