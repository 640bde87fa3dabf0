#include "tabalign/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabalign/config.hpp"
#include "tabalign/divergences.hpp"
#include "tabalign/error.hpp"
#include "tabalign/exact.hpp"
#include "tabalign/experiments.hpp"
#include "tabalign/fixtures.hpp"
#include "tabalign/instance.hpp"
#include "tabalign/records.hpp"
#include "tabalign/verify/acceptance.hpp"

namespace tabalign {

namespace {

using nlohmann::json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<unsigned> threads;
};

struct Single {
  std::string instance;
  std::string prompt;
  double beta = 1.0;
  std::size_t n = 1;
  std::size_t replicates = 1;
  bool kl = false;
  bool fresh = false;
  bool exact = false;
  std::string fallback = "reference_draw";
  std::size_t trials = 200;
  double delta = 0.05;
  std::vector<int> only;
  std::string out_dir = "fixtures";
  double coverage = 64.0;
  double eps = 0.05;
};

class ConfigIssue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t resolve_prompt(const ProblemInstance& inst, const std::string& id) {
  return id.empty() ? 0 : inst.prompt_index(id);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write to " + path + " failed");
}

// Config file (if any) merged with command-line overrides.
RunConfig load_run(const Globals& g, const std::string& command, const Single& single) {
  RunConfig rc;
  if (!g.config.empty()) {
    rc = parse_config(g.config);
    if (rc.command != command) {
      throw ConfigIssue("config command '" + rc.command + "' does not match subcommand '" + command + "'");
    }
    if (!single.instance.empty()) rc.instance = single.instance;
    if (!single.prompt.empty()) rc.prompt = single.prompt;
  } else {
    if (single.instance.empty()) throw ConfigIssue(command + " needs --config or --instance");
    rc.instance = single.instance;
    rc.command = command;
    if (!single.prompt.empty()) rc.prompt = single.prompt;
  }
  if (g.seed) rc.sweep.seed = *g.seed;
  if (!g.out.empty()) rc.out = g.out;
  if (!g.format.empty()) rc.format = parse_format(g.format);
  if (g.threads) rc.sweep.threads = *g.threads;
  return rc;
}

void log_cells(const std::vector<ExperimentRecord>& records, std::ostream& err) {
  for (const CellSummary& s : summarize(records)) {
    err << s.algorithm << " N=" << s.n;
    if (s.beta) err << " beta=" << num(*s.beta);
    err << " rows=" << s.count << " regret=" << num(s.regret.mean) << " se=" << num(s.regret.standard_error)
        << " modeled=" << num(s.modeled_reward.mean) << " queries=" << num(s.queries_used)
        << " fallback=" << num(s.fallback_rate);
    if (s.accept_step) err << " accept_step=" << num(*s.accept_step);
    err << '\n';
  }
}

int finish_records(const RunConfig& rc, const std::vector<ExperimentRecord>& records, std::ostream& out,
                   std::ostream& err) {
  log_cells(records, err);
  const std::string text = render_records(records, rc.format);
  const std::string path = rc.out ? rc.out->string() : std::string();
  emit(text, path, out);
  err << "checksum " << content_checksum(text) << '\n';
  return kExitOk;
}

int cmd_solve(const Globals& g, const Single& s, std::ostream& out) {
  if (s.instance.empty()) throw ConfigIssue("solve needs --instance");
  const ProblemInstance inst = load_instance(s.instance);
  const std::size_t x = resolve_prompt(inst, s.prompt);
  const RegularizedSolution sol = exact_chi2_policy(inst, x, s.beta);
  const bool as_json = g.format == "json";
  std::ostringstream text;
  if (as_json) {
    json doc;
    doc["prompt"] = inst.prompt(x).id;
    doc["beta"] = s.beta;
    doc["lambda"] = sol.lambda;
    doc["policy"] = std::vector<double>(sol.policy.begin(), sol.policy.end());
    doc["objective"] = sol.objective_value;
    if (s.kl) {
      const auto kl = exact_kl_policy(inst, x, s.beta);
      doc["kl_policy"] = std::vector<double>(kl.begin(), kl.end());
    }
    text << doc.dump(2) << '\n';
  } else {
    text << "prompt " << inst.prompt(x).id << "\nbeta " << num(s.beta) << "\nlambda " << num(sol.lambda)
         << "\npolicy";
    for (double p : sol.policy) text << ' ' << num(p);
    text << "\nobjective " << num(sol.objective_value) << '\n';
    if (s.kl) {
      text << "kl_policy";
      for (double p : exact_kl_policy(inst, x, s.beta)) text << ' ' << num(p);
      text << '\n';
    }
  }
  emit(text.str(), g.out, out);
  return kExitOk;
}

int cmd_single(const Globals& g, const Single& s, Algorithm algorithm, std::ostream& out, std::ostream& err) {
  const std::string name = algorithm == Algorithm::Itp ? "itp" : "bon";
  RunConfig rc = load_run(g, name, s);
  if (g.config.empty()) {
    rc.sweep.algorithms = {algorithm};
    rc.sweep.n_grid = {s.n};
    rc.sweep.replicates = s.replicates;
    if (algorithm == Algorithm::Itp) rc.sweep.beta_grid = {s.beta};
    rc.sweep.mode = s.exact ? RunMode::ExactLaw : RunMode::MonteCarlo;
    rc.sweep.sample_mode = s.fresh ? SampleMode::Fresh : SampleMode::Reuse;
    if (s.fallback == "best_of_n") {
      rc.sweep.fallback = ItpFallback::BestOfN;
    } else if (s.fallback != "reference_draw") {
      throw ConfigIssue("--fallback must be reference_draw or best_of_n");
    }
  } else {
    rc.sweep.algorithms = {algorithm};
  }
  const ProblemInstance inst = load_instance(rc.instance);
  rc.sweep.prompt = rc.prompt ? inst.prompt_index(*rc.prompt) : 0;
  return finish_records(rc, sweep_n(inst, rc.sweep), out, err);
}

int cmd_sweep(const Globals& g, const Single& s, const std::string& command, std::ostream& out, std::ostream& err) {
  if (g.config.empty()) throw ConfigIssue(command + " needs --config");
  RunConfig rc = load_run(g, command, s);
  const ProblemInstance inst = load_instance(rc.instance);
  rc.sweep.prompt = rc.prompt ? inst.prompt_index(*rc.prompt) : 0;
  validate(rc.sweep, inst);
  const auto records = command == "sweep-n" ? sweep_n(inst, rc.sweep) : sweep_beta(inst, rc.sweep);
  return finish_records(rc, records, out, err);
}

int cmd_concentration(const Globals& g, const Single& s, std::size_t n_flag, std::ostream& out) {
  RunConfig rc = load_run(g, "concentration", s);
  const ProblemInstance inst = load_instance(rc.instance);
  const std::size_t x = rc.prompt ? inst.prompt_index(*rc.prompt) : 0;
  double beta = s.beta;
  std::size_t trials = s.trials;
  double delta = s.delta;
  if (!g.config.empty()) {
    if (rc.sweep.beta_grid.empty()) throw ConfigIssue("concentration config needs beta_grid");
    beta = rc.sweep.beta_grid.front();
    trials = rc.trials;
    delta = rc.delta;
  }
  std::size_t n = n_flag;
  if (n == 0) n = g.config.empty() ? prescribed_sample_size(inst.reward_cap(), beta, delta) : rc.sweep.n_grid.front();
  const auto res = lambda_concentration_trial(inst, x, beta, n, trials, rc.sweep.seed);
  json doc;
  doc["beta"] = beta;
  doc["N"] = n;
  doc["trials"] = trials;
  doc["delta"] = delta;
  doc["prescribed_N"] = prescribed_sample_size(inst.reward_cap(), beta, delta);
  doc["fraction"] = res.fraction;
  emit(doc.dump(2) + "\n", rc.out ? rc.out->string() : std::string(), out);
  return kExitOk;
}

int cmd_verify(const Globals& g, const Single& s, std::ostream& out) {
  verify::AcceptanceOptions opt;
  opt.threads = g.threads.value_or(1);
  opt.only = s.only;
  bool ok = true;
  verify::run_acceptance(opt, [&](const verify::CriterionResult& r) {
    out << verify::format_result(r) << std::endl;
    ok = ok && r.passed;
  });
  return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_fixtures(const Single& s, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path dir = s.out_dir;
  fs::create_directories(dir);
  auto save = [&](const ProblemInstance& inst, const std::string& name) {
    save_instance(inst, dir / name);
    out << (dir / name).string() << '\n';
  };
  InstanceSpec canonical;
  canonical.prompts.push_back({"x0", {0.5, 0.5}, {1.0, 0.0}, {1.0, 0.0}, std::nullopt});
  save(build_tabular_instance(canonical), "canonical.json");
  save(build_cinf_lower_instance(s.coverage, s.n, s.eps, CinfVariant::SmallN).instance, "cinf_small_n.json");
  save(build_cinf_lower_instance(s.coverage, s.n, s.eps, CinfVariant::LargeN).instance, "cinf_large_n.json");
  ConeParams cone;
  cone.coverage = s.coverage;
  cone.eps_rm = s.eps;
  cone.n = std::max<std::size_t>(s.n, 4);
  save(build_cone_lower_instance(cone).instance, "cone_part2.json");
  const auto base = DiscreteDistribution::normalized({0.5, 0.3, 0.2});
  const auto comp = DiscreteDistribution::normalized({0.1, 0.2, 0.7});
  const auto cand = DiscreteDistribution::normalized({0.6, 0.3, 0.1});
  save(build_skyline_instance(base, comp, cand, s.eps).instance, "skyline.json");
  return kExitOk;
}

// First positional token when it names no subcommand; empty otherwise.
std::string unknown_subcommand(const std::vector<std::string>& argv) {
  static const std::vector<std::string> valued{"--config", "--seed", "--out", "--format", "--threads"};
  for (std::size_t i = 1; i < argv.size(); ++i) {
    const std::string& a = argv[i];
    if (a.rfind("-", 0) == 0) {
      if (std::find(valued.begin(), valued.end(), a) != valued.end()) ++i;
      continue;
    }
    return is_known_command(a) ? std::string() : a;
  }
  return {};
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference-time alignment on tabular problem instances", "tabalign"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  Single s;
  std::size_t concentration_n = 0;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--out", g.out, "output path (stdout when omitted)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "worker threads (never changes results)")->check(CLI::PositiveNumber);

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("--instance", s.instance, "instance JSON file");
    sub->add_option("--prompt", s.prompt, "prompt id (first prompt by default)");
  };
  CLI::App* solve = app.add_subcommand("solve", "print the exact chi-squared regularized policy");
  add_instance(solve);
  solve->add_option("--beta", s.beta, "regularization")->required()->check(CLI::PositiveNumber);
  solve->add_flag("--kl", s.kl, "also print the KL-regularized policy");

  CLI::App* bon = app.add_subcommand("bon", "run best-of-N");
  CLI::App* itp = app.add_subcommand("itp", "run InferenceTimePessimism");
  for (CLI::App* sub : {bon, itp}) {
    add_instance(sub);
    sub->add_option("--n", s.n, "query budget N")->check(CLI::PositiveNumber);
    sub->add_option("--replicates", s.replicates, "independent runs")->check(CLI::PositiveNumber);
    sub->add_flag("--exact", s.exact, "exact-law mode");
  }
  itp->add_option("--beta", s.beta, "regularization")->check(CLI::PositiveNumber);
  itp->add_option("--fallback", s.fallback, "reference_draw or best_of_n");
  itp->add_flag("--fresh", s.fresh, "fresh draws for the acceptance pass");

  CLI::App* sweep_n_cmd = app.add_subcommand("sweep-n", "sweep the query budget");
  CLI::App* sweep_beta_cmd = app.add_subcommand("sweep-beta", "sweep the regularization");
  for (CLI::App* sub : {sweep_n_cmd, sweep_beta_cmd}) add_instance(sub);

  CLI::App* conc = app.add_subcommand("concentration", "normalizer concentration trials");
  add_instance(conc);
  conc->add_option("--beta", s.beta, "regularization")->check(CLI::PositiveNumber);
  conc->add_option("--n", concentration_n, "sample size (prescribed from delta when omitted)");
  conc->add_option("--trials", s.trials, "trials")->check(CLI::PositiveNumber);
  conc->add_option("--delta", s.delta, "failure probability")->check(CLI::Range(1e-12, 1.0 - 1e-12));

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--only", s.only, "criterion ids to run");

  CLI::App* fixtures = app.add_subcommand("fixtures", "write the lower-bound constructions as instance files");
  fixtures->add_option("--out-dir", s.out_dir, "target directory");
  fixtures->add_option("--coverage", s.coverage, "coverage C")->check(CLI::PositiveNumber);
  fixtures->add_option("--n", s.n, "N the constructions are tuned for")->check(CLI::PositiveNumber);
  fixtures->add_option("--eps", s.eps, "reward-model error")->check(CLI::Range(1e-9, 1.0));

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const std::string bad = unknown_subcommand(argv);
    if (!bad.empty()) {
      err << "error: unknown subcommand '" << bad << "'\n\n" << app.help();
    } else {
      err << "error: " << e.what() << "\n\n" << app.help();
    }
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(g, s, out);
    if (bon->parsed()) return cmd_single(g, s, Algorithm::BestOfN, out, err);
    if (itp->parsed()) return cmd_single(g, s, Algorithm::Itp, out, err);
    if (sweep_n_cmd->parsed()) return cmd_sweep(g, s, "sweep-n", out, err);
    if (sweep_beta_cmd->parsed()) return cmd_sweep(g, s, "sweep-beta", out, err);
    if (conc->parsed()) return cmd_concentration(g, s, concentration_n, out);
    if (verify_cmd->parsed()) return cmd_verify(g, s, out);
    if (fixtures->parsed()) return cmd_fixtures(s, out);
  } catch (const ConfigIssue& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool config = e.code() == ErrorCode::Config || e.code() == ErrorCode::UnknownPrompt;
    return config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitConfig;
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace tabalign
