#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tabalign/experiments.hpp"
#include "tabalign/records.hpp"

namespace tabalign {

/// A validated run description.  Paths inside the document are resolved
/// against the directory of the config file.
struct RunConfig {
  std::filesystem::path instance;
  std::string command;
  SweepConfig sweep;
  std::optional<std::string> prompt;  ///< prompt id; the first prompt when absent
  std::optional<std::filesystem::path> out;
  OutputFormat format = OutputFormat::Csv;
  std::size_t trials = 200;  ///< concentration trials
  double delta = 0.05;       ///< concentration failure probability
};

/// Defaults: replicates 50, seed 0, format csv, mode monte_carlo,
/// fallback reference_draw, sample_reuse true, lambda_draws 256, threads 1.
/// Missing fields, type mismatches and unknown keys are reported with the
/// JSON pointer of the offending node.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// The fully defaulted config as JSON.
std::string config_to_json(const RunConfig& config);

bool is_known_command(const std::string& command) noexcept;

}  // namespace tabalign
