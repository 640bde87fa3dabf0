#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tabalign/divergences.hpp"
#include "tabalign/error.hpp"
#include "tabalign/exact.hpp"
#include "tabalign/normalizer.hpp"
#include "tabalign/verify/oracles.hpp"

using namespace tabalign;
using D = DiscreteDistribution;

TEST_CASE("chi-squared policy, worked cases") {
  const auto coin = testing::coin_fixture();
  const auto wide = exact_chi2_policy(coin, 0, 1.0);
  CHECK(wide.lambda == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(wide.policy[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(wide.policy[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(wide.beta == 1.0);

  const auto narrow = exact_chi2_policy(coin, 0, 0.25);
  CHECK(narrow.lambda == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(narrow.policy[0] == 1.0);
  CHECK(narrow.policy[1] == 0.0);

  const auto flat = testing::one_prompt({0.2, 0.3, 0.5}, {0.4, 0.4, 0.4}, {0, 0, 0});
  const auto sol = exact_chi2_policy(flat, 0, 0.7);
  CHECK(sol.lambda == doctest::Approx(0.4 - 0.7).epsilon(1e-14));
  for (std::size_t y = 0; y < 3; ++y) CHECK(sol.policy[y] == doctest::Approx(flat.prompt(0).base_policy[y]));
  CHECK_THROWS_AS(exact_chi2_policy(coin, 0, 0.0), Error);
  CHECK_THROWS_AS(exact_chi2_policy(coin, 0, -1.0), Error);
}

TEST_CASE("chi-squared policy invariants on random instances") {
  verify::Sampler s(41);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 1 + s.index(8);
    const double cap = s.uniform(1.0, 5.0);
    const double beta = s.log_uniform(0.01, 20.0);
    const auto base = D::normalized(s.simplex(k));
    std::vector<double> r(k);
    for (double& v : r) v = s.uniform(0.0, cap);
    const auto sol = exact_chi2_policy(base, r, beta);
    double sum = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      sum += sol.policy[y];
      CHECK(std::abs(sol.policy[y] - base[y] * std::max((r[y] - sol.lambda) / beta, 0.0)) <= 1e-10);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
    CHECK(sol.lambda >= -beta);
    CHECK(sol.lambda <= cap - beta);
    // Density ratio stays below (Rmax + β)/β.
    CHECK(coverage_inf(sol.policy, base) <= (cap + beta) / beta * (1.0 + 1e-12));
    CHECK(sol.objective_value == doctest::Approx(verify::chi2_objective_direct(sol.policy.weights(), base.weights(), r, beta)));
  }
}

TEST_CASE("KL policy") {
  const auto coin = testing::coin_fixture();
  const auto p = exact_kl_policy(coin, 0, 1.0);
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2689).epsilon(1e-4));
  const auto flat = testing::one_prompt({0.2, 0.8}, {0.5, 0.5}, {0, 0});
  const auto q = exact_kl_policy(flat, 0, 0.3);
  CHECK(q[0] == doctest::Approx(0.2).epsilon(1e-14));
  const auto big = exact_kl_policy(coin, 0, 1e6);
  CHECK(std::abs(big[0] - 0.5) <= 1e-5);
  // Max-subtraction keeps tiny β finite.
  const auto sharp = exact_kl_policy(coin, 0, 1e-4);
  CHECK(sharp[0] == 1.0);
}

TEST_CASE("KL tilt versus chi-squared ratio at small beta") {
  // Rmax/β = 20: the exponential tilt piles exp(Rmax/β)-scale ratio onto the
  // rare top response while the χ² policy stays below (Rmax+β)/β.
  const double beta = 0.05;
  const auto inst = testing::one_prompt({1e-6, 0.5 - 1e-6, 0.5}, {1.0, 0.0, 0.0}, {0, 0, 0});
  const auto& base = inst.prompt(0).base_policy;
  const auto kl = exact_kl_policy(inst, 0, beta);
  const auto chi = exact_chi2_policy(inst, 0, beta);
  const double kl_ratio = coverage_inf(kl, base);
  CHECK(kl_ratio >= std::exp(1.0 / beta) * kl[1] / base[1] * (1.0 - 1e-12));
  CHECK(coverage_inf(chi.policy, base) <= (1.0 + beta) / beta);
  CHECK(kl_ratio > coverage_inf(chi.policy, base));
}

TEST_CASE("best-of-N law, worked cases") {
  const auto coin = testing::coin_fixture();
  const auto two = exact_bon_law(coin, 0, 2);
  CHECK(two[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(exact_bon_law(coin, 0, 1) == coin.prompt(0).base_policy);
  const auto point = testing::one_prompt({0.0, 1.0, 0.0}, {1, 0, 0.5}, {0, 0, 0});
  CHECK(exact_bon_law(point, 0, 9) == D::point_mass(3, 1));
  CHECK_THROWS_AS(exact_bon_law(coin, 0, 0), Error);
}

TEST_CASE("best-of-N law matches enumeration, ties included") {
  verify::Sampler s(42);
  for (std::size_t k = 1; k <= 4; ++k) {
    for (std::size_t n = 1; n <= 4; ++n) {
      for (int t = 0; t < 20; ++t) {
        const auto base = D::normalized(s.simplex(k));
        std::vector<double> r(k);
        for (double& v : r) v = t % 2 ? static_cast<double>(s.index(2)) : s.uniform();
        const auto law = exact_bon_law(base, r, n);
        const auto brute = verify::enumerate_bon_law(base.weights(), r, n);
        for (std::size_t y = 0; y < k; ++y) CHECK(std::abs(law[y] - brute[y]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("rejection law, worked cases") {
  const auto base = D::uniform(2);
  const auto law = exact_rejection_law(D::point_mass(2, 0), base, 1.0, 1);
  CHECK(law.law[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(law.law[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(law.accepted_mass == 0.5);
  for (std::size_t n : {1u, 5u, 100u}) {
    const auto same = exact_rejection_law(base, base, 1.0, n);
    CHECK(same.law[0] == doctest::Approx(0.5).epsilon(1e-15));
  }
  const auto target = D::normalized({0.3, 0.7});
  const auto far = exact_rejection_law(target, base, 2.0, 10000);
  CHECK(std::abs(far.law[0] - 0.3) <= 1e-10);
  const auto orth = exact_rejection_law(D::point_mass(2, 1), D::point_mass(2, 0), 3.0, 4);
  CHECK(orth.degenerate);
  CHECK(orth.law == D::point_mass(2, 0));
}

TEST_CASE("rejection law matches the step-by-step series") {
  verify::Sampler s(43);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 2 + s.index(6);
    const auto base = D::normalized(s.simplex(k));
    const auto target = D::normalized(s.simplex(k));
    const double m = s.log_uniform(1.0, 50.0);
    const std::size_t n = 1 + s.index(60);
    const auto law = exact_rejection_law(target, base, m, n);
    const auto series = verify::series_rejection_law(target.weights(), base.weights(), m, n);
    for (std::size_t y = 0; y < k; ++y) CHECK(std::abs(law.law[y] - series[y]) <= 1e-12);
    // TV ≤ E_M + exp(−N(1−E_M)/M) (the form without the one-half factor).
    const double em = e_m_divergence(target, base, m);
    CHECK(tv_distance(target, law.law) <= em + std::exp(-static_cast<double>(n) * (1.0 - em) / m) + 1e-12);
  }
}

TEST_CASE("the one-half factor fails on a two-point example") {
  // π = (1, 0), π_ref = (0.1, 0.9), M = 10, N = 1: TV = 0.9² = 0.81.
  const auto target = D::point_mass(2, 0);
  const auto base = D::normalized({0.1, 0.9});
  const auto law = exact_rejection_law(target, base, 10.0, 1);
  const double tv = tv_distance(target, law.law);
  CHECK(tv == doctest::Approx(0.81).epsilon(1e-14));
  CHECK(tv > e_m_divergence(target, base, 10.0) + 0.5 * std::exp(-0.1));
}

TEST_CASE("pessimism law, worked cases") {
  const auto coin = testing::coin_fixture();
  const double lambda = exact_chi2_policy(coin, 0, 1.0).lambda;
  const auto one = exact_itp_law(coin, 0, 1.0, lambda, 1);
  CHECK(one.law[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(one.law[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto many = exact_itp_law(coin, 0, 1.0, lambda, 10000);
  CHECK(std::abs(many.law[0] - 0.75) <= 1e-10);

  const auto low = testing::one_prompt({0.5, 0.5}, {0.5, 0.2}, {0, 0});
  const auto dead = exact_itp_law(low, 0, 0.25, 0.75, 3);
  CHECK(dead.degenerate);
  CHECK(dead.law == low.prompt(0).base_policy);
  CHECK_THROWS_AS(exact_itp_law(coin, 0, 1.0, 0.5, 3), Error);
  CHECK_THROWS_AS(exact_itp_law(coin, 0, 1.0, -1.5, 3), Error);
}

TEST_CASE("pessimism law approaches the regularized policy on random instances") {
  verify::Sampler s(44);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + s.index(5);
    std::vector<double> r(k);
    for (double& v : r) v = s.uniform();
    const auto inst = testing::one_prompt(s.simplex(k), r, r);
    const double beta = s.log_uniform(0.05, 5.0);
    const auto sol = exact_chi2_policy(inst, 0, beta);
    const auto law = exact_itp_law(inst, 0, beta, sol.lambda, 100000);
    CHECK(tv_distance(law.law, sol.policy) <= 1e-9);
  }
}

TEST_CASE("regret") {
  const auto coin = testing::coin_fixture();
  const auto star = D::point_mass(2, 0);
  CHECK(regret(coin, 0, star, star) == 0.0);
  CHECK(regret(coin, 0, star, coin.prompt(0).base_policy) == 0.5);
  CHECK(regret(coin, 0, D::point_mass(2, 1), star) == -1.0);
}

// For normalizer values with mass a ∈ [1/2, 3/2], the normalized policy loses
// to any comparator by at most (3β/4)C¹[π] − (β/4)C¹[π_λ].
TEST_CASE("sensitivity to an inexact normalizer") {
  verify::Sampler s(45);
  int checked = 0;
  for (int t = 0; t < 400; ++t) {
    const std::size_t k = 2 + s.index(5);
    const auto base = D::normalized(s.simplex(k));
    std::vector<double> r(k);
    for (double& v : r) v = s.uniform();
    const double beta = s.log_uniform(0.05, 2.0);
    const double target_mass = s.uniform(0.5, 1.5);
    // Φ_β(λ) = a exactly when λ normalizes at regularization a·β.
    const double lambda = compute_norm_constant_weighted(r, base, target_mass * beta);
    std::vector<double> w(k);
    for (std::size_t y = 0; y < k; ++y) w[y] = base[y] * std::max((r[y] - lambda) / beta, 0.0);
    double mass = 0.0;
    for (double v : w) mass += v;
    CHECK(std::abs(mass - target_mass) <= 1e-9);
    for (double& v : w) v /= mass;
    const auto pl = D::normalized(w);
    for (int c = 0; c < 20; ++c) {
      const auto pi = D::normalized(s.simplex(k));
      const double lhs = verify::dot(pi.weights(), r) - verify::dot(pl.weights(), r);
      const double rhs = 0.75 * beta * coverage_l1(pi, base) - 0.25 * beta * coverage_l1(pl, base);
      CHECK(lhs <= rhs + 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 8000);
}
