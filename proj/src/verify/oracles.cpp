#include "tabalign/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tabalign::verify {

long double relu_mass_ld(std::span<const double> rewards, std::span<const double> weights, long double lambda,
                         double beta) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const long double gap = static_cast<long double>(rewards[i]) - lambda;
    if (gap > 0.0L) acc += static_cast<long double>(weights[i]) * gap;
  }
  return acc / static_cast<long double>(beta);
}

double bisect_normalizer(std::span<const double> rewards, std::span<const double> weights, double beta,
                         double total) {
  long double lo = *std::min_element(rewards.begin(), rewards.end()) - static_cast<long double>(beta) * 2.0L;
  long double hi = *std::max_element(rewards.begin(), rewards.end());
  for (int it = 0; it < 200; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (relu_mass_ld(rewards, weights, mid, beta) > total) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

std::vector<double> enumerate_bon_law(std::span<const double> pi_ref, std::span<const double> rewards,
                                      std::size_t n) {
  const std::size_t k = pi_ref.size();
  std::vector<double> law(k, 0.0);
  std::vector<std::size_t> tuple(n, 0);
  while (true) {
    double p = 1.0;
    std::size_t best = tuple[0];
    for (std::size_t y : tuple) {
      p *= pi_ref[y];
      if (rewards[y] > rewards[best] || (rewards[y] == rewards[best] && y < best)) best = y;
    }
    law[best] += p;
    std::size_t pos = 0;
    while (pos < n && ++tuple[pos] == k) tuple[pos++] = 0;
    if (pos == n) break;
  }
  return law;
}

std::vector<double> series_rejection_law(std::span<const double> target, std::span<const double> pi_ref, double m,
                                         std::size_t n) {
  const std::size_t k = pi_ref.size();
  std::vector<double> accept(k);
  double step_accept = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    // P(draw y and accept it) = π_ref(y)·min{π(y)/(M π_ref(y)), 1}
    accept[y] = pi_ref[y] > 0.0 ? pi_ref[y] * std::min(target[y] / (m * pi_ref[y]), 1.0) : 0.0;
    step_accept += accept[y];
  }
  std::vector<double> law(k, 0.0);
  double reach = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < k; ++y) law[y] += reach * accept[y];
    reach *= 1.0 - step_accept;
  }
  for (std::size_t y = 0; y < k; ++y) law[y] += reach * pi_ref[y];
  return law;
}

double e_m_direct(std::span<const double> pi, std::span<const double> pi_ref, double m) {
  double acc = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) acc += std::max(pi[y] - m * pi_ref[y], 0.0);
  return acc;
}

double dot(std::span<const double> p, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * r[i];
  return acc;
}

double chi2_objective_direct(std::span<const double> pi, std::span<const double> pi_ref,
                             std::span<const double> rewards, double beta) {
  double c1 = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (pi[y] == 0.0) continue;
    if (pi_ref[y] == 0.0) throw std::domain_error("uncovered");
    c1 += pi[y] * pi[y] / pi_ref[y];
  }
  return dot(pi, rewards) - 0.5 * beta * (c1 - 1.0);
}

double Sampler::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

std::size_t Sampler::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(rng_.uniform() * static_cast<double>(n)));
}

std::vector<double> Sampler::simplex(std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) total += (x = exponential());
  for (double& x : w) x /= total;
  return w;
}

}  // namespace tabalign::verify
