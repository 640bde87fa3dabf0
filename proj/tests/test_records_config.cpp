#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "tabalign/config.hpp"
#include "tabalign/error.hpp"
#include "tabalign/records.hpp"

using namespace tabalign;

namespace {

std::vector<ExperimentRecord> sample_records() {
  const auto inst = testing::one_prompt({0.2, 0.3, 0.5}, {1.0, 0.6, 0.0}, {0.0, 1.0, 0.5});
  SweepConfig cfg;
  cfg.algorithms = {Algorithm::Itp, Algorithm::BestOfN, Algorithm::Reference};
  cfg.n_grid = {4, 1};
  cfg.beta_grid = {1.0 / 3.0, 0.5};
  cfg.replicates = 3;
  cfg.seed = 42;
  return sweep_n(inst, cfg);
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "tabalign_records_test";
  std::filesystem::create_directories(dir);
  return dir;
}

Error config_error(const std::string& text) {
  try {
    parse_config_text(text, testing::source_path("configs"));
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a config error");
  return Error(ErrorCode::Config, "");
}

}  // namespace

TEST_CASE("rendering is deterministic") {
  const auto rs = sample_records();
  for (auto f : {OutputFormat::Csv, OutputFormat::Json}) {
    const auto a = render_records(rs, f);
    auto shuffled = rs;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(render_records(shuffled, f) == a);
    CHECK(content_checksum(a) == content_checksum(render_records(rs, f)));
    CHECK(content_checksum(a).size() == 16);
  }
  CHECK(content_checksum("") == "cbf29ce484222325");
  CHECK(content_checksum("a") == "af63dc4c8601ec8c");
}

TEST_CASE("empty record sets are rejected") {
  CHECK_THROWS_AS(render_records({}, OutputFormat::Csv), Error);
  CHECK_THROWS_AS(write_records({}, OutputFormat::Csv, scratch_dir() / "empty.csv"), Error);
}

TEST_CASE("one record renders as header plus one row") {
  ExperimentRecord r;
  r.algorithm = "bon";
  r.n = 4;
  r.replicate = 0;
  r.seed = 7;
  r.true_reward = 0.1;
  r.modeled_reward = 0.75;
  r.regret = 0.9;
  r.queries_used = 4;
  const auto text = render_records({r}, OutputFormat::Csv);
  std::istringstream in(text);
  std::string header, row, extra;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(header == kCsvHeader);
  // β absent stays an empty field; 17 significant digits.
  CHECK(row == "bon,4,,0,7,0.10000000000000001,0.75,0.90000000000000002,4,0");
}

TEST_CASE("write then read is lossless") {
  const auto rs = sample_records();
  const auto dir = scratch_dir();
  {
    const auto path = dir / "rs.json";
    const auto sum = write_records(rs, OutputFormat::Json, path);
    const auto back = read_records(path, OutputFormat::Json);
    CHECK(back == rs);
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(content_checksum(buf.str()) == sum);
  }
  {
    // The CSV columns do not carry the acceptance step.
    auto expect = rs;
    for (auto& r : expect) r.accept_step.reset();
    const auto path = dir / "rs.csv";
    write_records(rs, OutputFormat::Csv, path);
    CHECK(read_records(path, OutputFormat::Csv) == expect);
  }
  CHECK_THROWS_AS(write_records(rs, OutputFormat::Csv, dir / "missing" / "x.csv"), Error);
  CHECK_THROWS_AS(parse_records("algorithm,N\n", OutputFormat::Csv), Error);
}

TEST_CASE("format tags") {
  CHECK(parse_format("csv") == OutputFormat::Csv);
  CHECK(parse_format("json") == OutputFormat::Json);
  CHECK(to_string(OutputFormat::Json) == "json");
  CHECK_THROWS_AS(parse_format("xml"), Error);
}

TEST_CASE("minimal config gets defaults") {
  const auto c = parse_config_text(R"({"instance": "../data/canonical.json", "command": "sweep-n"})",
                                   testing::source_path("configs"));
  CHECK(c.command == "sweep-n");
  CHECK(c.sweep.replicates == 50);
  CHECK(c.sweep.seed == 0);
  CHECK(c.format == OutputFormat::Csv);
  CHECK(c.sweep.mode == RunMode::MonteCarlo);
  CHECK(c.sweep.sample_mode == SampleMode::Reuse);
  CHECK(c.sweep.fallback == ItpFallback::ReferenceDraw);
  CHECK(c.sweep.threads == 1);
  CHECK_FALSE(c.prompt.has_value());
  CHECK(std::filesystem::exists(c.instance));
  const auto echoed = config_to_json(c);
  CHECK(echoed.find("\"replicates\": 50") != std::string::npos);
}

TEST_CASE("config errors name the offending node") {
  const std::string head = R"({"instance": "../data/canonical.json", "command": "sweep-beta", )";
  {
    const auto e = config_error(head + R"("beta_grid": [1], "betaa": [1]})");
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("/betaa") != std::string::npos);
  }
  {
    const auto e = config_error(head + R"("beta_grid": [1], "replicates": 0})");
    CHECK(std::string(e.what()).find("/replicates") != std::string::npos);
  }
  {
    const auto e = config_error(R"({"command": "sweep-n"})");
    CHECK(std::string(e.what()).find("/instance") != std::string::npos);
  }
  {
    const auto e = config_error(head + R"("beta_grid": [1], "n_grid": [1, "two"]})");
    CHECK(std::string(e.what()).find("/n_grid/1") != std::string::npos);
  }
  {
    const auto e = config_error(head + R"("beta_grid": [1], "format": "xml"})");
    CHECK(std::string(e.what()).find("/format") != std::string::npos);
  }
  {
    const auto e = config_error(R"({"instance": "../data/nope.json", "command": "sweep-n"})");
    CHECK(std::string(e.what()).find("/instance") != std::string::npos);
  }
  CHECK(config_error("[1, 2]").code() == ErrorCode::Config);
  CHECK(config_error("{").code() == ErrorCode::Config);
}

TEST_CASE("bundled configs parse") {
  for (const char* name : {"sweep_n.json", "sweep_n_exact.json", "sweep_beta.json", "concentration.json"}) {
    INFO(name);
    CHECK_NOTHROW(parse_config(testing::source_path(std::string("configs/") + name)));
  }
}
