#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tabalign/error.hpp"
#include "tabalign/instance.hpp"

using namespace tabalign;

namespace {

ErrorCode code_of(const InstanceSpec& spec) {
  try {
    build_tabular_instance(spec);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

InstanceSpec spec_with(std::vector<double> w, std::vector<double> rh, std::vector<double> rs, double cap = 1.0) {
  InstanceSpec s;
  s.reward_cap = cap;
  s.prompts.push_back({"p", std::move(w), std::move(rh), std::move(rs), std::nullopt});
  return s;
}

}  // namespace

TEST_CASE("well-formed single prompt builds") {
  const auto inst = build_tabular_instance(spec_with({0.5, 0.5}, {1, 0}, {1, 0}));
  CHECK(inst.prompt_count() == 1);
  CHECK(inst.prompt(0).response_count() == 2);
  CHECK(inst.reward_cap() == 1.0);
  CHECK_FALSE(inst.has_explicit_prompt_distribution());
  CHECK(inst.prompt_distribution()[0] == 1.0);
}

TEST_CASE("each malformed input has its own error code") {
  CHECK(code_of(spec_with({0.5, -0.1, 0.6}, {0, 0, 0}, {0, 0, 0})) == ErrorCode::NegativeWeight);
  CHECK(code_of(spec_with({0.0, 0.0}, {0, 0}, {0, 0})) == ErrorCode::ZeroMassRow);
  CHECK(code_of(spec_with({0.5, 0.6}, {0, 0}, {0, 0})) == ErrorCode::NotNormalized);
  CHECK(code_of(spec_with({0.5, 0.5}, {1.5, 0}, {0, 0})) == ErrorCode::RewardOutOfRange);
  CHECK(code_of(spec_with({0.5, 0.5}, {0, 0}, {0, -0.1})) == ErrorCode::RewardOutOfRange);
  CHECK(code_of(spec_with({0.5, 0.5}, {0, 0}, {0, 0}, 0.5)) == ErrorCode::InvalidRewardCap);
  CHECK(code_of(spec_with({0.5, 0.5}, {0, 0, 0}, {0, 0})) == ErrorCode::DimensionMismatch);
}

TEST_CASE("rows within 1e-9 of unit mass are renormalized") {
  const auto inst = build_tabular_instance(spec_with({0.5, 0.5 + 1e-12}, {0, 0}, {0, 0}));
  const auto& w = inst.prompt(0).base_policy;
  CHECK(std::abs(w[0] + w[1] - 1.0) <= 1e-12);
  CHECK(w.is_normalized());
}

TEST_CASE("rewards may sit on the cap") {
  CHECK_NOTHROW(build_tabular_instance(spec_with({1.0}, {3.0}, {0.0}, 3.0)));
}

TEST_CASE("prompt lookup and comparator default") {
  InstanceSpec s = spec_with({0.2, 0.3, 0.5}, {0, 0, 0}, {0.4, 0.9, 0.9});
  s.prompts.push_back({"q", {1.0, 0.0, 0.0}, {0, 0, 0}, {0, 0, 0}, std::vector<double>{0.0, 0.0, 1.0}});
  const auto inst = build_tabular_instance(s);
  CHECK(inst.prompt_index("q") == 1);
  CHECK_THROWS_AS(inst.prompt_index("zzz"), Error);
  // Lowest index among the maximizers of r*.
  CHECK(inst.comparator_for(0) == DiscreteDistribution::point_mass(3, 1));
  CHECK(inst.comparator_for(1) == DiscreteDistribution::point_mass(3, 2));
}

TEST_CASE("duplicate prompt ids are rejected") {
  InstanceSpec s = spec_with({1.0}, {0}, {0});
  s.prompts.push_back(s.prompts.front());
  CHECK_THROWS_AS(build_tabular_instance(s), Error);
}

TEST_CASE("json round trip is lossless") {
  InstanceSpec s = spec_with({0.1, 0.2, 0.7}, {0.123456789012345678, 1.0 / 3.0, 0.0}, {0.3, 0.2, 0.1}, 2.0);
  s.prompts.push_back({"7", {0.25, 0.75, 0.0}, {0, 0, 0}, {0, 0, 2.0}, std::nullopt});
  s.prompt_distribution = std::vector<double>{0.4, 0.6};
  const auto inst = build_tabular_instance(s);
  const auto back = parse_instance_json(instance_to_json(inst));
  REQUIRE(back.prompt_count() == 2);
  CHECK(back.reward_cap() == 2.0);
  CHECK(back.has_explicit_prompt_distribution());
  for (std::size_t x = 0; x < 2; ++x) {
    CHECK(back.prompt(x).id == inst.prompt(x).id);
    CHECK(back.prompt(x).base_policy == inst.prompt(x).base_policy);
    CHECK(back.prompt(x).reward_model == inst.prompt(x).reward_model);
    CHECK(back.prompt(x).true_reward == inst.prompt(x).true_reward);
  }
}

TEST_CASE("json errors carry a path") {
  auto message = [](const std::string& text) {
    try {
      parse_instance_json(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"prompts":[],"r_max":1,"foo":1})").find("/foo") != std::string::npos);
  CHECK(message(R"({"prompts":[{"id":"a","weights":[1],"r_hat":[0]}],"r_max":1})").find("/prompts/0/r_star") !=
        std::string::npos);
  CHECK(message(R"({"prompts":[{"id":"a","weights":[1,"x"],"r_hat":[0,0],"r_star":[0,0]}],"r_max":1})")
            .find("/prompts/0/weights/1") != std::string::npos);
  CHECK(message(R"({"prompts":[{"id":"a","weights":[1],"r_hat":[0],"r_star":[0]}]})").find("/r_max") !=
        std::string::npos);
}

TEST_CASE("bundled instance files load") {
  for (const char* name : {"data/canonical.json", "data/smooth.json", "data/two_prompts.json",
                           "data/cinf_small_n.json", "data/cone_part2.json", "data/skyline.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_instance(testing::source_path(name)));
  }
}
