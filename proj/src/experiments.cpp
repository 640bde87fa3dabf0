#include "tabalign/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "tabalign/divergences.hpp"
#include "tabalign/error.hpp"
#include "tabalign/exact.hpp"
#include "tabalign/normalizer.hpp"
#include "tabalign/oracle.hpp"
#include "tabalign/rng.hpp"

namespace tabalign {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Reference: return "reference";
    case Algorithm::BestOfN: return "bon";
    case Algorithm::Itp: return "itp";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view tag) {
  if (tag == "reference") return Algorithm::Reference;
  if (tag == "bon") return Algorithm::BestOfN;
  if (tag == "itp") return Algorithm::Itp;
  throw Error(ErrorCode::Config, "unknown algorithm '" + std::string(tag) + "' (expected reference, bon or itp)");
}

bool record_less(const ExperimentRecord& a, const ExperimentRecord& b) {
  // std::optional orders nullopt first, which is what the CSV order wants.
  return std::tie(a.algorithm, a.n, a.beta, a.replicate) < std::tie(b.algorithm, b.n, b.beta, b.replicate);
}

namespace {

struct Cell {
  AlgorithmParams params;
  std::uint64_t key = 0;
};

std::uint64_t cell_key(std::uint64_t seed, const AlgorithmParams& p) {
  const auto tag = to_string(p.algorithm);
  const std::uint64_t beta_bits = p.beta ? std::bit_cast<std::uint64_t>(*p.beta) : 0;
  return derive_key(seed, hash_string(tag.data(), tag.size()) ^ mix64(p.n), beta_bits);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers.  Work is split by
// index, so outputs written to slot i never depend on the schedule.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ExperimentRecord blank_record(const AlgorithmParams& p, std::uint64_t replicate, std::uint64_t seed) {
  ExperimentRecord r;
  r.algorithm = std::string(to_string(p.algorithm));
  r.n = p.n;
  if (p.algorithm == Algorithm::Itp) r.beta = p.beta;
  r.replicate = replicate;
  r.seed = seed;
  return r;
}

ExperimentRecord run_replicate(const ProblemInstance& instance, std::size_t prompt, double comparator_value,
                               const AlgorithmParams& p, std::uint64_t replicate, std::uint64_t seed) {
  OracleSession session(instance, prompt, seed);
  AlignmentOutcome out;
  switch (p.algorithm) {
    case Algorithm::Reference: {
      const Draw d = session.draw_one();
      out.chosen_response = d.response;
      out.queries_used = session.queries_used();
      break;
    }
    case Algorithm::BestOfN:
      out = best_of_n(session, p.n);
      break;
    case Algorithm::Itp: {
      ItpOptions opt;
      opt.beta = p.beta.value();
      opt.n = p.n;
      opt.fallback = p.fallback;
      opt.mode = p.sample_mode;
      out = inference_time_pessimism(session, opt);
      break;
    }
  }
  const Prompt& data = instance.prompt(prompt);
  ExperimentRecord r = blank_record(p, replicate, seed);
  r.true_reward = data.true_reward[out.chosen_response];
  r.modeled_reward = data.reward_model[out.chosen_response];
  r.regret = comparator_value - r.true_reward;
  r.queries_used = static_cast<double>(out.queries_used);
  r.fallback_rate = out.fallback_used ? 1.0 : 0.0;
  if (p.algorithm == Algorithm::Itp) {
    r.accept_step = static_cast<double>(out.accepted_at.value_or(p.n));
  }
  return r;
}

void fill_from_law(ExperimentRecord& r, const Prompt& data, double comparator_value, const DiscreteDistribution& law) {
  r.true_reward = expected_reward(law, data.true_reward);
  r.modeled_reward = expected_reward(law, data.reward_model);
  r.regret = comparator_value - r.true_reward;
}

struct ItpLawDraw {
  double lambda = 0.0;
  SamplerLaw law;
  double accept_step = 0.0;
};

// Exact conditional law of ITP given a normalizer estimated from N fresh draws.
ItpLawDraw itp_law_draw(const ProblemInstance& instance, std::size_t prompt, double beta, std::size_t n,
                        std::uint64_t seed) {
  OracleSession session(instance, prompt, seed);
  const auto draws = session.draw_batch(n);
  std::vector<double> rewards(draws.size());
  std::transform(draws.begin(), draws.end(), rewards.begin(), [](const Draw& d) { return d.modeled_reward; });
  ItpLawDraw out;
  out.lambda = compute_norm_constant_empirical(rewards, beta);
  out.law = exact_itp_law(instance, prompt, beta, out.lambda, n);
  const double m = (instance.reward_cap() - out.lambda) / beta;
  const double accept = out.law.accepted_mass / m;
  out.accept_step = accept > 0.0 ? (1.0 - out.law.fallback_probability) / accept : static_cast<double>(n);
  return out;
}

ExperimentRecord exact_record(const ProblemInstance& instance, std::size_t prompt, double comparator_value,
                              const AlgorithmParams& p, std::uint64_t replicate, std::uint64_t seed) {
  const Prompt& data = instance.prompt(prompt);
  ExperimentRecord r = blank_record(p, replicate, seed);
  switch (p.algorithm) {
    case Algorithm::Reference:
      fill_from_law(r, data, comparator_value, data.base_policy);
      r.queries_used = 1.0;
      break;
    case Algorithm::BestOfN:
      fill_from_law(r, data, comparator_value, exact_bon_law(instance, prompt, p.n));
      r.queries_used = static_cast<double>(p.n);
      break;
    case Algorithm::Itp: {
      const ItpLawDraw d = itp_law_draw(instance, prompt, p.beta.value(), p.n, seed);
      fill_from_law(r, data, comparator_value, d.law.law);
      r.fallback_rate = d.law.fallback_probability;
      r.accept_step = d.accept_step;
      r.queries_used = static_cast<double>(p.n) + d.accept_step + d.law.fallback_probability;
      break;
    }
  }
  return r;
}

std::vector<Cell> grid_cells(const SweepConfig& config, const std::vector<Algorithm>& algorithms) {
  std::vector<Cell> cells;
  for (Algorithm a : algorithms) {
    for (std::size_t n : config.n_grid) {
      AlgorithmParams p;
      p.algorithm = a;
      p.n = n;
      p.fallback = config.fallback;
      p.sample_mode = config.sample_mode;
      if (a == Algorithm::Itp) {
        for (double b : config.beta_grid) {
          p.beta = b;
          cells.push_back({p, cell_key(config.seed, p)});
        }
      } else {
        cells.push_back({p, cell_key(config.seed, p)});
      }
    }
  }
  return cells;
}

std::vector<ExperimentRecord> run_grid(const ProblemInstance& instance, const SweepConfig& config,
                                       const std::vector<Algorithm>& algorithms) {
  validate(config, instance);
  const std::vector<Cell> cells = grid_cells(config, algorithms);
  const double comparator_value =
      expected_reward(instance.comparator_for(config.prompt), instance.prompt(config.prompt).true_reward);

  struct Task {
    std::size_t cell;
    std::uint64_t replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::size_t reps = config.replicates;
    if (config.mode == RunMode::ExactLaw) {
      reps = cells[c].params.algorithm == Algorithm::Itp ? config.lambda_draws : 1;
    }
    for (std::size_t k = 0; k < reps; ++k) tasks.push_back({c, k});
  }

  std::vector<ExperimentRecord> records(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
    const Cell& cell = cells[tasks[i].cell];
    const std::uint64_t rep = tasks[i].replicate;
    const std::uint64_t seed = derive_key(cell.key, rep);
    records[i] = config.mode == RunMode::MonteCarlo
                     ? run_replicate(instance, config.prompt, comparator_value, cell.params, rep, seed)
                     : exact_record(instance, config.prompt, comparator_value, cell.params, rep, seed);
  });
  std::sort(records.begin(), records.end(), record_less);
  return records;
}

Estimate mean_and_se(const std::vector<double>& xs) {
  Estimate e;
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.standard_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

}  // namespace

void validate(const SweepConfig& config, const ProblemInstance& instance) {
  if (config.algorithms.empty()) throw Error(ErrorCode::Config, "algorithm set is empty");
  if (config.n_grid.empty()) throw Error(ErrorCode::Config, "N grid is empty");
  for (std::size_t n : config.n_grid) {
    if (n == 0) throw Error(ErrorCode::Config, "N grid entries must be >= 1");
  }
  const bool has_itp = std::find(config.algorithms.begin(), config.algorithms.end(), Algorithm::Itp) !=
                       config.algorithms.end();
  if (has_itp && config.beta_grid.empty()) throw Error(ErrorCode::Config, "itp needs a nonempty beta grid");
  for (double b : config.beta_grid) {
    if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::Config, "beta grid entries must be positive");
  }
  if (config.mode == RunMode::MonteCarlo && config.replicates == 0) {
    throw Error(ErrorCode::Config, "replicates must be >= 1");
  }
  if (config.mode == RunMode::ExactLaw) {
    if (config.lambda_draws == 0) throw Error(ErrorCode::Config, "lambda_draws must be >= 1");
    if (has_itp && config.fallback == ItpFallback::BestOfN) {
      throw Error(ErrorCode::Config, "exact-law mode supports only the reference_draw fallback");
    }
  }
  if (config.prompt >= instance.prompt_count()) {
    throw Error(ErrorCode::UnknownPrompt, "prompt index " + std::to_string(config.prompt) + " out of range");
  }
}

Estimate estimate_regret_mc(const ProblemInstance& instance, std::size_t prompt, const AlgorithmParams& params,
                            std::size_t replicates, std::uint64_t seed, bool identical_seeds, unsigned threads) {
  if (replicates < 2) throw Error(ErrorCode::InvalidParameter, "replicates must be >= 2");
  if (params.algorithm == Algorithm::Itp && !params.beta) throw Error(ErrorCode::InvalidParameter, "itp needs beta");
  const double comparator_value =
      expected_reward(instance.comparator_for(prompt), instance.prompt(prompt).true_reward);
  std::vector<double> regrets(replicates);
  parallel_for(replicates, threads, [&](std::size_t k) {
    const std::uint64_t s = identical_seeds ? seed : derive_key(seed, k);
    regrets[k] = run_replicate(instance, prompt, comparator_value, params, k, s).regret;
  });
  return mean_and_se(regrets);
}

std::vector<ExperimentRecord> sweep_n(const ProblemInstance& instance, const SweepConfig& config) {
  return run_grid(instance, config, config.algorithms);
}

std::vector<ExperimentRecord> sweep_beta(const ProblemInstance& instance, const SweepConfig& config) {
  SweepConfig c = config;
  c.algorithms = {Algorithm::Itp};
  return run_grid(instance, c, c.algorithms);
}

std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<std::string, std::uint64_t, std::optional<double>>;
  std::map<Key, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) groups[{r.algorithm, r.n, r.beta}].push_back(&r);

  std::vector<CellSummary> out;
  for (const auto& [key, rows] : groups) {
    CellSummary s;
    std::tie(s.algorithm, s.n, s.beta) = key;
    s.count = rows.size();
    std::vector<double> regret, truth, modeled;
    double steps = 0.0;
    bool any_step = false;
    for (const auto* r : rows) {
      regret.push_back(r->regret);
      truth.push_back(r->true_reward);
      modeled.push_back(r->modeled_reward);
      s.queries_used += r->queries_used;
      s.fallback_rate += r->fallback_rate;
      if (r->accept_step) steps += *r->accept_step, any_step = true;
    }
    const double count = static_cast<double>(rows.size());
    s.regret = mean_and_se(regret);
    s.true_reward = mean_and_se(truth);
    s.modeled_reward = mean_and_se(modeled);
    s.queries_used /= count;
    s.fallback_rate /= count;
    if (any_step) s.accept_step = steps / count;
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t prescribed_sample_size(double reward_cap, double beta, double delta) {
  if (!(reward_cap >= 1.0) || !(beta > 0.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "need r_max >= 1, beta > 0 and delta in (0, 1)");
  }
  const double n = 48.0 * ((reward_cap + beta) / beta) * std::log(60.0 * reward_cap / (beta * delta));
  return static_cast<std::size_t>(std::ceil(n));
}

ConcentrationResult lambda_concentration_trial(const ProblemInstance& instance, std::size_t prompt, double beta,
                                               std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::InvalidParameter, "trials must be >= 1");
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "N must be >= 1");
  const Prompt& data = instance.prompt(prompt);
  ConcentrationResult out;
  out.masses.resize(trials);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    OracleSession session(instance, prompt, derive_key(seed, t));
    const auto draws = session.draw_batch(n);
    std::vector<double> rewards(n);
    std::transform(draws.begin(), draws.end(), rewards.begin(), [](const Draw& d) { return d.modeled_reward; });
    const double phi = normalizer_mass(data, compute_norm_constant_empirical(rewards, beta), beta);
    out.masses[t] = phi;
    if (phi >= 0.5 && phi <= 1.5) ++hits;
  }
  out.fraction = static_cast<double>(hits) / static_cast<double>(trials);
  return out;
}

IidAverage iid_prompt_average(const ProblemInstance& instance, const AlgorithmParams& params, std::uint64_t seed,
                              std::size_t lambda_draws) {
  if (!instance.has_explicit_prompt_distribution()) {
    throw Error(ErrorCode::MissingPromptDistribution, "i.i.d. averaging needs an explicit rho");
  }
  if (instance.prompt_count() < 2) throw Error(ErrorCode::InvalidParameter, "i.i.d. averaging needs >= 2 prompts");
  if (params.n == 0) throw Error(ErrorCode::InvalidParameter, "N must be >= 1");
  if (params.algorithm == Algorithm::Itp && (!params.beta || lambda_draws == 0)) {
    throw Error(ErrorCode::InvalidParameter, "itp needs beta and at least one lambda draw");
  }
  const DiscreteDistribution& rho = instance.prompt_distribution();
  IidAverage avg;
  for (std::size_t x = 0; x < instance.prompt_count(); ++x) {
    const Prompt& data = instance.prompt(x);
    const DiscreteDistribution comparator = instance.comparator_for(x);
    PromptSummary s;
    s.prompt = data.id;
    s.weight = rho[x];
    switch (params.algorithm) {
      case Algorithm::Reference:
        s.regret = regret(instance, x, comparator, data.base_policy);
        break;
      case Algorithm::BestOfN:
        s.regret = regret(instance, x, comparator, exact_bon_law(instance, x, params.n));
        break;
      case Algorithm::Itp: {
        double acc = 0.0;
        for (std::size_t k = 0; k < lambda_draws; ++k) {
          const auto d = itp_law_draw(instance, x, *params.beta, params.n, derive_key(seed, x, k));
          acc += regret(instance, x, comparator, d.law.law);
        }
        s.regret = acc / static_cast<double>(lambda_draws);
        break;
      }
    }
    s.reward_error = reward_error(instance, x);
    const CoverageReport cov = coverage_report(comparator, data.base_policy);
    s.c_one = cov.c_one;
    s.c_inf = cov.c_inf;
    if (s.weight > 0.0) {
      avg.regret += s.weight * s.regret;
      avg.reward_error += s.weight * s.reward_error;
      avg.c_one += s.weight * s.c_one;
      avg.c_inf = std::max(avg.c_inf, s.c_inf);
    }
    avg.prompts.push_back(std::move(s));
  }
  return avg;
}

}  // namespace tabalign
