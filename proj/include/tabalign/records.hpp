#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabalign/experiments.hpp"

namespace tabalign {

enum class OutputFormat { Csv, Json };

std::string_view to_string(OutputFormat f) noexcept;
OutputFormat parse_format(std::string_view tag);

inline constexpr std::string_view kCsvHeader =
    "algorithm,N,beta,replicate,seed,true_reward,modeled_reward,regret,queries_used,fallback_rate";

/// Serializes in canonical row order with 17 significant digits.  An absent β
/// is an empty CSV field (null in JSON).  The acceptance step is carried only
/// by the JSON form.
std::string render_records(std::vector<ExperimentRecord> records, OutputFormat format);

/// FNV-1a 64 of the bytes, as 16 hex digits.
std::string content_checksum(std::string_view bytes);

/// Writes the rendering to `path` (or stdout when path is "-") and returns
/// its checksum.  Throws on empty input or an unwritable path.
std::string write_records(const std::vector<ExperimentRecord>& records, OutputFormat format,
                          const std::filesystem::path& path);

std::vector<ExperimentRecord> parse_records(std::string_view text, OutputFormat format);
std::vector<ExperimentRecord> read_records(const std::filesystem::path& path, OutputFormat format);

}  // namespace tabalign
