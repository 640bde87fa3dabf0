#include "tabalign/records.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "tabalign/error.hpp"

namespace tabalign {

using nlohmann::json;

std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_format(std::string_view tag) {
  if (tag == "csv") return OutputFormat::Csv;
  if (tag == "json") return OutputFormat::Json;
  throw Error(ErrorCode::Config, "format must be csv or json, got '" + std::string(tag) + "'");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const std::vector<ExperimentRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.algorithm;
    out += ',' + std::to_string(r.n);
    out += ',' + (r.beta ? fmt_double(*r.beta) : std::string());
    out += ',' + std::to_string(r.replicate);
    out += ',' + std::to_string(r.seed);
    out += ',' + fmt_double(r.true_reward);
    out += ',' + fmt_double(r.modeled_reward);
    out += ',' + fmt_double(r.regret);
    out += ',' + fmt_double(r.queries_used);
    out += ',' + fmt_double(r.fallback_rate);
    out += '\n';
  }
  return out;
}

std::string render_json(const std::vector<ExperimentRecord>& records) {
  json rows = json::array();
  for (const auto& r : records) {
    json row = json::object();
    row["algorithm"] = r.algorithm;
    row["N"] = r.n;
    row["beta"] = r.beta ? json(*r.beta) : json(nullptr);
    row["replicate"] = r.replicate;
    row["seed"] = r.seed;
    row["true_reward"] = r.true_reward;
    row["modeled_reward"] = r.modeled_reward;
    row["regret"] = r.regret;
    row["queries_used"] = r.queries_used;
    row["fallback_rate"] = r.fallback_rate;
    row["accept_step"] = r.accept_step ? json(*r.accept_step) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

double parse_double(const std::string& field, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": bad number '" + field + "'");
  }
}

std::uint64_t parse_u64(const std::string& field, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": bad integer '" + field + "'");
  }
}

std::vector<ExperimentRecord> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorCode::Io, "missing or unexpected CSV header");
  std::vector<ExperimentRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw Error(ErrorCode::Io, "line " + std::to_string(lineno) + ": expected 10 fields");
    ExperimentRecord r;
    r.algorithm = f[0];
    r.n = parse_u64(f[1], lineno);
    if (!f[2].empty()) r.beta = parse_double(f[2], lineno);
    r.replicate = parse_u64(f[3], lineno);
    r.seed = parse_u64(f[4], lineno);
    r.true_reward = parse_double(f[5], lineno);
    r.modeled_reward = parse_double(f[6], lineno);
    r.regret = parse_double(f[7], lineno);
    r.queries_used = parse_double(f[8], lineno);
    r.fallback_rate = parse_double(f[9], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ExperimentRecord> parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::Io, "record file must hold a JSON array");
  std::vector<ExperimentRecord> out;
  try {
    for (const auto& row : doc) {
      ExperimentRecord r;
      r.algorithm = row.at("algorithm").get<std::string>();
      r.n = row.at("N").get<std::uint64_t>();
      if (!row.at("beta").is_null()) r.beta = row.at("beta").get<double>();
      r.replicate = row.at("replicate").get<std::uint64_t>();
      r.seed = row.at("seed").get<std::uint64_t>();
      r.true_reward = row.at("true_reward").get<double>();
      r.modeled_reward = row.at("modeled_reward").get<double>();
      r.regret = row.at("regret").get<double>();
      r.queries_used = row.at("queries_used").get<double>();
      r.fallback_rate = row.at("fallback_rate").get<double>();
      if (row.contains("accept_step") && !row["accept_step"].is_null()) {
        r.accept_step = row["accept_step"].get<double>();
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed record: ") + e.what());
  }
  return out;
}

}  // namespace

std::string render_records(std::vector<ExperimentRecord> records, OutputFormat format) {
  if (records.empty()) throw Error(ErrorCode::InvalidParameter, "no records to write");
  std::stable_sort(records.begin(), records.end(), record_less);
  return format == OutputFormat::Csv ? render_csv(records) : render_json(records);
}

std::string content_checksum(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string write_records(const std::vector<ExperimentRecord>& records, OutputFormat format,
                          const std::filesystem::path& path) {
  const std::string text = render_records(records, format);
  if (path == "-") {
    std::cout << text << std::flush;
  } else {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write to " + path.string() + " failed");
  }
  return content_checksum(text);
}

std::vector<ExperimentRecord> parse_records(std::string_view text, OutputFormat format) {
  return format == OutputFormat::Csv ? parse_csv(text) : parse_json(text);
}

std::vector<ExperimentRecord> read_records(const std::filesystem::path& path, OutputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_records(ss.str(), format);
}

}  // namespace tabalign
