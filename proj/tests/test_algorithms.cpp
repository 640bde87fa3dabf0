#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tabalign/algorithms.hpp"
#include "tabalign/error.hpp"
#include "tabalign/exact.hpp"
#include "tabalign/rng.hpp"

using namespace tabalign;

namespace {

// |empirical − p| within three binomial standard deviations.
bool within_3sigma(std::size_t hits, std::size_t trials, double p) {
  const double n = static_cast<double>(trials);
  const double sd = std::sqrt(p * (1.0 - p) / n);
  return std::abs(static_cast<double>(hits) / n - p) <= 3.0 * sd + 1e-15;
}

}  // namespace

TEST_CASE("best-of-N with one draw returns that draw") {
  const auto inst = testing::one_prompt({0.2, 0.3, 0.5}, {0.1, 0.9, 0.5}, {0, 0, 0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    OracleSession a(inst, 0, seed);
    OracleSession b(inst, 0, seed);
    const auto out = best_of_n(a, 1);
    CHECK(out.chosen_response == b.draw_one().response);
    CHECK(out.queries_used == 1);
  }
}

TEST_CASE("best-of-N picks the drawn maximizer, lowest index among ties") {
  const auto inst = testing::one_prompt({0.25, 0.25, 0.25, 0.25}, {0.5, 1.0, 1.0, 0.2}, {0, 0, 0, 0});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    OracleSession replay(inst, 0, seed);
    const auto draws = replay.draw_batch(3);
    OracleSession s(inst, 0, seed);
    const auto out = best_of_n(s, 3);
    CHECK(out.queries_used == 3);
    std::size_t expect = draws[0].response;
    for (const auto& d : draws) {
      const double a = inst.prompt(0).reward_model[d.response];
      const double b = inst.prompt(0).reward_model[expect];
      if (a > b || (a == b && d.response < expect)) expect = d.response;
    }
    CHECK(out.chosen_response == expect);
  }
}

TEST_CASE("best-of-N frequency matches the exact law") {
  const auto inst = testing::coin_fixture();
  constexpr std::size_t reps = 100000;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(1, r));
    hits += best_of_n(s, 2).chosen_response == 0;
  }
  CHECK(within_3sigma(hits, reps, 0.75));
}

TEST_CASE("rejection sampling edge weights") {
  const auto inst = testing::one_prompt({0.3, 0.7}, {0, 0}, {0, 0});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    OracleSession a(inst, 0, seed);
    OracleSession replay(inst, 0, seed);
    const auto always = rejection_sampling(a, [](const Draw&) { return 2.0; }, 2.0, 5);
    CHECK(always.accepted_at == std::optional<std::size_t>(1));
    CHECK_FALSE(always.fallback_used);
    CHECK(always.chosen_response == replay.draw_one().response);
    CHECK(always.queries_used == 1);

    OracleSession b(inst, 0, seed);
    const auto never = rejection_sampling(b, [](const Draw&) { return 0.0; }, 2.0, 5);
    CHECK(never.fallback_used);
    CHECK_FALSE(never.accepted_at.has_value());
    CHECK(never.queries_used == 6);
  }
  OracleSession s(inst, 0, 1);
  CHECK_THROWS_AS(rejection_sampling(s, [](const Draw&) { return 1.0; }, 0.0, 5), Error);
}

TEST_CASE("rejection sampling frequency matches the exact law") {
  const auto inst = testing::coin_fixture();
  constexpr std::size_t reps = 100000;
  std::size_t hits = 0;
  std::size_t fallbacks = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(2, r));
    // Target (1, 0): w = π/π_ref = (2, 0).
    const auto out = rejection_sampling(s, [](const Draw& d) { return d.response == 0 ? 2.0 : 0.0; }, 1.0, 1);
    hits += out.chosen_response == 0;
    fallbacks += out.fallback_used;
  }
  CHECK(within_3sigma(hits, reps, 0.75));
  CHECK(within_3sigma(fallbacks, reps, 0.5));
}

TEST_CASE("pessimism with a single draw") {
  const auto inst = testing::one_prompt({0.5, 0.5}, {0.8, 0.2}, {0, 0});
  constexpr std::size_t reps = 100000;
  std::size_t accepted_high = 0;
  std::size_t high = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(3, r));
    OracleSession replay(inst, 0, derive_key(3, r));
    const std::size_t first = replay.draw_one().response;
    ItpOptions opt;
    opt.beta = 0.5;
    opt.n = 1;
    const auto out = inference_time_pessimism(s, opt);
    const double rh = inst.prompt(0).reward_model[first];
    CHECK(*out.lambda_hat == doctest::Approx(rh - 0.5).epsilon(1e-15));
    if (first == 0) {
      ++high;
      accepted_high += out.accepted_at.has_value();
    }
  }
  // Accept probability β/(Rmax − r̂(y₁) + β) = 0.5/0.7.
  CHECK(within_3sigma(accepted_high, high, 0.5 / 0.7));
}

TEST_CASE("pessimism with constant rewards") {
  const auto inst = testing::one_prompt({0.4, 0.6}, {0.3, 0.3}, {0, 0});
  constexpr std::size_t reps = 50000;
  std::size_t first_try = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(4, r));
    ItpOptions opt;
    opt.beta = 1.5;
    opt.n = 8;
    const auto out = inference_time_pessimism(s, opt);
    CHECK(*out.lambda_hat == doctest::Approx(0.3 - 1.5).epsilon(1e-14));
    first_try += out.accepted_at == std::optional<std::size_t>(1);
  }
  CHECK(within_3sigma(first_try, reps, 1.5 / (1.0 - 0.3 + 1.5)));
}

TEST_CASE("pessimism query accounting and outcome invariants") {
  const auto inst = testing::one_prompt({0.2, 0.3, 0.5}, {1.0, 0.6, 0.0}, {0, 0, 0});
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (auto fb : {ItpFallback::ReferenceDraw, ItpFallback::BestOfN}) {
      for (auto mode : {SampleMode::Reuse, SampleMode::Fresh}) {
        OracleSession s(inst, 0, seed);
        ItpOptions opt;
        opt.beta = 0.05;
        opt.n = 4;
        opt.fallback = fb;
        opt.mode = mode;
        const auto out = inference_time_pessimism(s, opt);
        CHECK(out.fallback_used != out.accepted_at.has_value());
        if (out.accepted_at) CHECK(*out.accepted_at <= out.queries_used);
        const std::uint64_t extra = out.fallback_used && fb == ItpFallback::ReferenceDraw ? 1 : 0;
        if (mode == SampleMode::Reuse) {
          CHECK(out.queries_used == 4 + extra);
        } else {
          const std::uint64_t scanned = out.accepted_at.value_or(4);
          CHECK(out.queries_used == 4 + scanned + extra);
        }
        CHECK(s.queries_used() == out.queries_used);
      }
    }
  }
}

TEST_CASE("pessimism with the exact normalizer follows the exact law") {
  const auto inst = testing::one_prompt({0.2, 0.3, 0.5}, {1.0, 0.6, 0.0}, {0, 0, 0});
  const double beta = 0.4;
  const std::size_t n = 3;
  const double lambda = exact_chi2_policy(inst, 0, beta).lambda;
  const auto law = exact_itp_law(inst, 0, beta, lambda, n);
  constexpr std::size_t reps = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(5, r));
    ItpOptions opt;
    opt.beta = beta;
    opt.n = n;
    opt.lambda_override = lambda;
    ++counts[inference_time_pessimism(s, opt).chosen_response];
  }
  for (std::size_t y = 0; y < 3; ++y) CHECK(within_3sigma(counts[y], reps, law.law[y]));
}

TEST_CASE("pessimism with a large budget approaches the regularized policy") {
  const auto inst = testing::coin_fixture();
  constexpr std::size_t reps = 10000;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    OracleSession s(inst, 0, derive_key(6, r));
    ItpOptions opt;
    opt.beta = 1.0;
    opt.n = 10000;
    hits += inference_time_pessimism(s, opt).chosen_response == 0;
  }
  CHECK(within_3sigma(hits, reps, 0.75));
}
