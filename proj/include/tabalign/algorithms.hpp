#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "tabalign/oracle.hpp"

namespace tabalign {

struct AlignmentOutcome {
  std::size_t chosen_response = 0;
  std::uint64_t queries_used = 0;
  /// 1-based position of the accepted draw, when rejection sampling accepted.
  std::optional<std::size_t> accepted_at;
  bool fallback_used = false;
  std::optional<double> lambda_hat;
};

/// Draws N responses and returns the r̂-maximizer; the lowest response index
/// wins among equal rewards.
AlignmentOutcome best_of_n(OracleSession& session, std::size_t n);

using WeightFn = std::function<double(const Draw&)>;

/// Accepts draw i with probability min{w(y_i)/M, 1}; after N rejections
/// returns one further draw with fallback_used set.
AlignmentOutcome rejection_sampling(OracleSession& session, const WeightFn& weight, double m, std::size_t n);

enum class ItpFallback { ReferenceDraw, BestOfN };

/// `Reuse` runs the acceptance pass over the same N draws that produced λ̂;
/// `Fresh` estimates λ̂ from N draws and then rejection-samples over N new ones.
enum class SampleMode { Reuse, Fresh };

struct ItpOptions {
  double beta = 1.0;
  std::size_t n = 1;
  ItpFallback fallback = ItpFallback::ReferenceDraw;
  SampleMode mode = SampleMode::Reuse;
  /// Replace the estimated normalizer (diagnostics only).
  std::optional<double> lambda_override;
};

AlignmentOutcome inference_time_pessimism(OracleSession& session, const ItpOptions& options);

}  // namespace tabalign
