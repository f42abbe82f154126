#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "morphoplast/evaluation.hpp"

namespace morphoplast {

inline constexpr int kRecordSchemaVersion = 1;

std::string code_version();

// Written as the first line of every output: JSON for .jsonl files, a
// "# key=value ..." comment for CSV files.
struct Provenance {
  std::string schema;  // e.g. "morphoplast.eval_records"
  std::string config_hash;
  std::string code_version = morphoplast::code_version();
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;  // every config field

  std::string json_line() const;
  std::string csv_comment() const;
};

nlohmann::ordered_json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

// Append-only JSONL file with a provenance header line. With `resume`, an
// existing file with the same header keeps its complete lines (a torn last
// line is dropped) and their keys are reported by has(); without it the
// file is rewritten. A header mismatch on resume throws.
class JsonlAppender {
 public:
  using KeyOf = std::function<std::string(const nlohmann::json&)>;
  JsonlAppender(const std::string& path, const Provenance& prov, bool resume, KeyOf key_of);

  bool has(const std::string& key) const;
  std::size_t existing() const { return existing_; }
  // Serialised; lines with an already-present key are dropped.
  void append(const std::string& key, const std::string& line);
  std::size_t written() const { return written_; }

 private:
  std::string path_;
  std::ofstream out_;
  mutable std::mutex mu_;
  std::set<std::string> keys_;
  std::size_t existing_ = 0;
  std::size_t written_ = 0;
};

struct JsonlFile {
  nlohmann::json header;
  std::vector<nlohmann::json> lines;
};
// Throws std::runtime_error when the file is missing or the header lacks a
// schema_version.
JsonlFile read_jsonl(const std::string& path);

std::vector<EvalRecord> read_records(const std::string& path);

// Writes "<provenance comment>\n<header>\n<rows...>" atomically enough for
// our purposes (truncate + write).
void write_csv(const std::string& path, const Provenance& prov, const std::string& header,
               const std::vector<std::string>& rows);

// Round-trip decimal; NaN prints as "nan".
std::string fmt_double(double v);

}  // namespace morphoplast
