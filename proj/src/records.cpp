#include "morphoplast/records.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace morphoplast {

using nlohmann::json;
using nlohmann::ordered_json;

std::string code_version() {
#ifdef MORPHOPLAST_VERSION
  return MORPHOPLAST_VERSION;
#else
  return "unknown";
#endif
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string Provenance::json_line() const {
  ordered_json j;
  j["schema"] = schema;
  j["schema_version"] = kRecordSchemaVersion;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["seed"] = seed;
  j["config"] = config;
  return j.dump();
}

std::string Provenance::csv_comment() const {
  return "# schema=" + schema + " schema_version=" + std::to_string(kRecordSchemaVersion) +
         " config_hash=" + config_hash + " code_version=" + code_version + " seed=" + std::to_string(seed);
}

namespace {

ordered_json nan_safe(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double from_nan_safe(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

ordered_json doubles(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(nan_safe(x));
  return a;
}

std::vector<double> doubles_from(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(from_nan_safe(x));
  return v;
}

}  // namespace

ordered_json record_to_json(const EvalRecord& r) {
  ordered_json j;
  j["key"] = r.key();
  j["network_id"] = r.network_id;
  j["spec"] = r.spec;
  j["eta"] = r.params.eta;
  j["lambda"] = r.params.lambda;
  j["mode"] = to_string(r.mode);
  j["mean_reward"] = r.mean_reward;
  j["delta_r"] = r.delta_r;
  j["rewards"] = doubles(r.rewards);
  j["dw_pre"] = doubles(r.dw_pre);
  j["dw_post"] = doubles(r.dw_post);
  ordered_json solved = ordered_json::array();
  for (const auto& s : r.solved_steps) solved.push_back(s ? ordered_json(*s) : ordered_json(nullptr));
  j["solved_steps"] = solved;
  j["non_functional"] = r.non_functional;
  j["degenerate_episodes"] = r.degenerate_episodes;
  return j;
}

EvalRecord record_from_json(const json& j) {
  EvalRecord r;
  r.network_id = j.at("network_id").get<std::string>();
  r.spec = j.at("spec").get<std::string>();
  r.params.eta = j.at("eta").get<double>();
  r.params.lambda = j.at("lambda").get<double>();
  r.mode = mode_from_string(j.at("mode").get<std::string>());
  r.mean_reward = j.at("mean_reward").get<double>();
  r.delta_r = j.at("delta_r").get<double>();
  r.rewards = doubles_from(j.at("rewards"));
  r.dw_pre = doubles_from(j.at("dw_pre"));
  r.dw_post = doubles_from(j.at("dw_post"));
  for (const auto& s : j.at("solved_steps")) {
    r.solved_steps.push_back(s.is_null() ? std::nullopt : std::optional<int>(s.get<int>()));
  }
  r.non_functional = j.at("non_functional").get<bool>();
  r.degenerate_episodes = j.at("degenerate_episodes").get<int>();
  return r;
}

JsonlAppender::JsonlAppender(const std::string& path, const Provenance& prov, bool resume, KeyOf key_of)
    : path_(path) {
  const std::string header = prov.json_line();
  std::vector<std::string> kept;
  if (resume && std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) break;  // torn line
      std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      if (first) {
        if (line != header) {
          throw std::runtime_error("cannot resume " + path + ": provenance header differs (config or version changed)");
        }
        first = false;
        continue;
      }
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        continue;
      }
      const std::string k = key_of(j);
      if (keys_.insert(k).second) kept.push_back(std::move(line));
    }
  }
  existing_ = kept.size();
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  out_ << header << '\n';
  for (const auto& l : kept) out_ << l << '\n';
  out_.flush();
}

bool JsonlAppender::has(const std::string& key) const {
  std::lock_guard lock(mu_);
  return keys_.count(key) > 0;
}

void JsonlAppender::append(const std::string& key, const std::string& line) {
  std::lock_guard lock(mu_);
  if (!keys_.insert(key).second) return;
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed on " + path_);
  ++written_;
}

JsonlFile read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  JsonlFile f;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (first) {
      if (!j.contains("schema_version")) throw std::runtime_error(path + " lacks a schema header line");
      f.header = std::move(j);
      first = false;
      continue;
    }
    f.lines.push_back(std::move(j));
  }
  if (first) throw std::runtime_error(path + " is empty");
  return f;
}

std::vector<EvalRecord> read_records(const std::string& path) {
  const JsonlFile f = read_jsonl(path);
  std::vector<EvalRecord> out;
  out.reserve(f.lines.size());
  for (const auto& j : f.lines) out.push_back(record_from_json(j));
  return out;
}

void write_csv(const std::string& path, const Provenance& prov, const std::string& header,
               const std::vector<std::string>& rows) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << prov.csv_comment() << '\n' << header << '\n';
  for (const auto& r : rows) out << r << '\n';
}

}  // namespace morphoplast
