#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "tabalign/cli.hpp"

using namespace tabalign;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tabalign");
  std::ostringstream out, err;
  const int status = run_command(args, out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("solve prints the regularized policy") {
  const auto r = run({"solve", "--instance", testing::source_path("data/canonical.json"), "--beta", "1"});
  CHECK(r.status == kExitOk);
  CHECK(r.out.find("lambda -0.5") != std::string::npos);
  CHECK(r.out.find("0.75") != std::string::npos);
  CHECK(r.out.find("0.25") != std::string::npos);
}

TEST_CASE("unknown subcommand") {
  const auto r = run({"frobnicate"});
  CHECK(r.status == kExitConfig);
  CHECK(r.err.find("frobnicate") != std::string::npos);
  CHECK(r.err.find("sweep-n") != std::string::npos);
}

TEST_CASE("no subcommand is a usage error") { CHECK(run({}).status != kExitOk); }

TEST_CASE("bad option values map to the config status") {
  CHECK(run({"solve", "--instance", testing::source_path("data/canonical.json")}).status == kExitConfig);
  CHECK(run({"solve", "--instance", testing::source_path("data/canonical.json"), "--beta", "1", "--prompt", "zz"})
            .status == kExitConfig);
  CHECK(run({"sweep-n", "--config", testing::source_path("configs/sweep_beta.json")}).status == kExitConfig);
}

TEST_CASE("verify single criteria") {
  CHECK(run({"verify", "--only", "2"}).status == kExitOk);
  const auto failing = run({"verify", "--only", "6"});
  CHECK(failing.status == kExitVerificationFailed);
  CHECK(failing.out.find("FAIL") != std::string::npos);
}

TEST_CASE("bon exact mode") {
  const auto r = run({"bon", "--instance", testing::source_path("data/canonical.json"), "--n", "2", "--exact"});
  CHECK(r.status == kExitOk);
  CHECK(r.out.find(",0.75,") != std::string::npos);
}

TEST_CASE("sweep output is independent of the thread count") {
  const auto cfg = testing::source_path("configs/sweep_n.json");
  const auto a = run({"sweep-n", "--config", cfg, "--out", "-", "--threads", "1"});
  const auto b = run({"sweep-n", "--config", cfg, "--out", "-", "--threads", "3"});
  REQUIRE(a.status == kExitOk);
  CHECK(a.out == b.out);
  CHECK_FALSE(a.out.empty());
  const auto c = run({"sweep-n", "--config", cfg, "--out", "-", "--seed", "8"});
  CHECK(c.out != a.out);
}
