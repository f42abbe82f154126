#include "morphoplast/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "morphoplast/environments.hpp"
#include "morphoplast/evolution.hpp"
#include "morphoplast/network.hpp"
#include "morphoplast/records.hpp"
#include "morphoplast/sweep_analysis.hpp"

namespace morphoplast {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto nx = s.find(sep, pos);
    const std::string item = trim(s.substr(pos, nx == std::string_view::npos ? std::string_view::npos : nx - pos));
    if (!item.empty()) out.push_back(item);
    if (nx == std::string_view::npos) break;
    pos = nx + 1;
  }
  return out;
}

template <class T>
T parse_num(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = {
      {"kind", {[](RunConfig& c, const std::string& v) { c.kind = experiment_kind_from_string(v); },
                [](const RunConfig& c) { return to_string(c.kind); }}},
      {"env", {[](RunConfig& c, const std::string& v) { c.env = v; }, [](const RunConfig& c) { return c.env; }}},
      {"grid_width", {[](RunConfig& c, const std::string& v) { c.grid_width = parse_num<std::size_t>("grid_width", v); },
                      [](const RunConfig& c) { return std::to_string(c.grid_width); }}},
      {"grid_height",
       {[](RunConfig& c, const std::string& v) { c.grid_height = parse_num<std::size_t>("grid_height", v); },
        [](const RunConfig& c) { return std::to_string(c.grid_height); }}},
      {"iterations", {[](RunConfig& c, const std::string& v) { c.iterations = parse_num<std::size_t>("iterations", v); },
                      [](const RunConfig& c) { return std::to_string(c.iterations); }}},
      {"genomes", {[](RunConfig& c, const std::string& v) { c.genomes = parse_num<std::size_t>("genomes", v); },
                   [](const RunConfig& c) { return std::to_string(c.genomes); }}},
      {"genome_seed",
       {[](RunConfig& c, const std::string& v) { c.genome_seed = parse_num<std::uint64_t>("genome_seed", v); },
        [](const RunConfig& c) { return std::to_string(c.genome_seed); }}},
      {"genome_file", {[](RunConfig& c, const std::string& v) { c.genome_file = v; },
                       [](const RunConfig& c) { return c.genome_file; }}},
      {"pool_file", {[](RunConfig& c, const std::string& v) { c.pool_file = v; },
                     [](const RunConfig& c) { return c.pool_file; }}},
      {"sweep_grid", {[](RunConfig& c, const std::string& v) { c.sweep_grid = v; },
                      [](const RunConfig& c) { return c.sweep_grid; }}},
      {"strata",
       {[](RunConfig& c, const std::string& v) {
          c.strata.clear();
          if (v == "all") return;
          for (const auto& s : split(v, ',')) c.strata.push_back(stratum_from_string(s));
        },
        [](const RunConfig& c) {
          if (c.strata.empty()) return std::string("all");
          std::vector<std::string> v;
          for (Stratum s : c.strata) v.push_back(to_string(s));
          return join(v);
        }}},
      {"max_networks",
       {[](RunConfig& c, const std::string& v) { c.max_networks = parse_num<std::size_t>("max_networks", v); },
        [](const RunConfig& c) { return std::to_string(c.max_networks); }}},
      {"seeds", {[](RunConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
                 [](const RunConfig& c) { return format_seed_list(c.seeds); }}},
      {"output_dir", {[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                      [](const RunConfig& c) { return c.output_dir; }}},
      {"switch_times",
       {[](RunConfig& c, const std::string& v) {
          c.switch_times.clear();
          for (const auto& s : split(v, ',')) c.switch_times.push_back(parse_num<int>("switch_times", s));
        },
        [](const RunConfig& c) {
          std::vector<std::string> v;
          for (int t : c.switch_times) v.push_back(std::to_string(t));
          return join(v);
        }}},
      {"condition", {[](RunConfig& c, const std::string& v) { c.condition = v; },
                     [](const RunConfig& c) { return c.condition; }}},
      {"runs", {[](RunConfig& c, const std::string& v) { c.runs = parse_num<std::size_t>("runs", v); },
                [](const RunConfig& c) { return std::to_string(c.runs); }}},
      {"run_seed", {[](RunConfig& c, const std::string& v) { c.run_seed = parse_num<std::uint64_t>("run_seed", v); },
                    [](const RunConfig& c) { return std::to_string(c.run_seed); }}},
      {"generations", {[](RunConfig& c, const std::string& v) { c.generations = parse_num<int>("generations", v); },
                       [](const RunConfig& c) { return std::to_string(c.generations); }}},
      {"population", {[](RunConfig& c, const std::string& v) { c.population = parse_num<std::size_t>("population", v); },
                      [](const RunConfig& c) { return std::to_string(c.population); }}},
      {"stop_at_fitness",
       {[](RunConfig& c, const std::string& v) {
          if (v == "none") {
            c.stop_at_fitness.reset();
          } else {
            c.stop_at_fitness = parse_num<double>("stop_at_fitness", v);
          }
        },
        [](const RunConfig& c) { return c.stop_at_fitness ? fmt_double(*c.stop_at_fitness) : std::string("none"); }}},
      {"replicates", {[](RunConfig& c, const std::string& v) { c.replicates = parse_num<std::size_t>("replicates", v); },
                      [](const RunConfig& c) { return std::to_string(c.replicates); }}},
      {"control_seed",
       {[](RunConfig& c, const std::string& v) { c.control_seed = parse_num<std::uint64_t>("control_seed", v); },
        [](const RunConfig& c) { return std::to_string(c.control_seed); }}},
      {"match_roles", {[](RunConfig& c, const std::string& v) { c.match_roles = parse_bool("match_roles", v); },
                       [](const RunConfig& c) { return std::string(c.match_roles ? "true" : "false"); }}},
      {"degenerate_tolerance",
       {[](RunConfig& c, const std::string& v) { c.degenerate_tolerance = parse_num<double>("degenerate_tolerance", v); },
        [](const RunConfig& c) { return fmt_double(c.degenerate_tolerance); }}},
      {"records", {[](RunConfig& c, const std::string& v) { c.records = split(v, ','); },
                   [](const RunConfig& c) { return join(c.records); }}},
      {"ns_records", {[](RunConfig& c, const std::string& v) { c.ns_records = split(v, ','); },
                      [](const RunConfig& c) { return join(c.ns_records); }}},
      {"ga_logs", {[](RunConfig& c, const std::string& v) { c.ga_logs = split(v, ','); },
                   [](const RunConfig& c) { return join(c.ga_logs); }}},
      {"snapshot_every",
       {[](RunConfig& c, const std::string& v) { c.snapshot_every = parse_num<std::size_t>("snapshot_every", v); },
        [](const RunConfig& c) { return std::to_string(c.snapshot_every); }}},
  };
  return f;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::pool: return "pool";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::nonstationary: return "nonstationary";
    case ExperimentKind::off_on: return "off_on";
    case ExperimentKind::dose_response: return "dose_response";
    case ExperimentKind::coevolve: return "coevolve";
    case ExperimentKind::random_control: return "random_control";
    case ExperimentKind::report: return "report";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
  for (auto k : {ExperimentKind::pool, ExperimentKind::sweep, ExperimentKind::nonstationary, ExperimentKind::off_on,
                 ExperimentKind::dose_response, ExperimentKind::coevolve, ExperimentKind::random_control,
                 ExperimentKind::report}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + std::string(s) + "'");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos) {
      const auto lo = parse_num<std::uint64_t>("seeds", item.substr(0, dash));
      const auto hi = parse_num<std::uint64_t>("seeds", item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("config key 'seeds': empty range '" + item + "'");
      for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(parse_num<std::uint64_t>("seeds", item));
    }
  }
  return out;
}

std::string format_seed_list(const std::vector<std::uint64_t>& s) {
  bool contiguous = !s.empty();
  for (std::size_t i = 1; i < s.size(); ++i) contiguous = contiguous && s[i] == s[i - 1] + 1;
  if (contiguous && s.size() > 1) return std::to_string(s.front()) + "-" + std::to_string(s.back());
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    auto it = fields().find(key);
    if (it == fields().end()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    try {
      it->second.set(c, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, f] : fields()) out += key + "=" + f.get(*this) + "\n";
  return out;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [key, f] : fields()) j[key] = f.get(*this);
  return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

std::uint64_t RunConfig::primary_seed() const {
  switch (kind) {
    case ExperimentKind::pool: return genome_seed;
    case ExperimentKind::coevolve: return run_seed;
    case ExperimentKind::random_control: return control_seed;
    default: return seeds.empty() ? 0 : seeds.front();
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("invalid config: " + m); };
  auto need_file = [&](const std::string& key, const std::string& path) {
    if (path.empty()) fail(key + " is required for kind " + to_string(kind));
    if (!std::filesystem::exists(path)) fail(key + " '" + path + "' does not exist");
  };
  EnvSpec spec;
  try {
    spec = EnvSpec::from_descriptor(env);
  } catch (const std::exception& e) {
    fail(std::string("env: ") + e.what());
  }
  if (grid_width < 2 || grid_height < 2) fail("grid_width and grid_height must be at least 2");
  if (iterations < 1) fail("iterations must be at least 1");
  if (seeds.empty()) fail("seeds must not be empty");
  if (degenerate_tolerance < 0.0 || degenerate_tolerance > 1.0) fail("degenerate_tolerance must lie in [0, 1]");
  switch (kind) {
    case ExperimentKind::pool:
      if (!genome_file.empty()) need_file("genome_file", genome_file);
      break;
    case ExperimentKind::sweep:
    case ExperimentKind::nonstationary:
    case ExperimentKind::off_on:
      need_file("pool_file", pool_file);
      try {
        build_grid(sweep_grid);
      } catch (const std::exception& e) {
        fail(e.what());
      }
      if (kind != ExperimentKind::sweep && !spec.perturbation) {
        fail("env must carry a perturbation (e.g. cartpole+pole_mass_x10@200) for kind " + to_string(kind));
      }
      break;
    case ExperimentKind::dose_response:
      need_file("pool_file", pool_file);
      build_grid(sweep_grid);
      if (!spec.perturbation) fail("env must carry a perturbation for dose_response");
      if (switch_times.size() < 2) fail("dose_response needs at least two switch_times");
      for (int t : switch_times) {
        if (t < 1 || t > spec.max_steps) fail("switch time " + std::to_string(t) + " outside the episode");
      }
      break;
    case ExperimentKind::coevolve: {
      condition_from_string(condition);
      if (runs < 1) fail("runs must be at least 1");
      if (population < 3) fail("population must be at least 3");
      if (generations < 0) fail("generations must be non-negative");
      break;
    }
    case ExperimentKind::random_control:
      need_file("pool_file", pool_file);
      if (replicates < 1) fail("replicates must be at least 1");
      break;
    case ExperimentKind::report:
      if (records.empty() && ga_logs.empty()) fail("report needs records and/or ga_logs");
      for (const auto& r : records) need_file("records", r);
      for (const auto& r : ns_records) need_file("ns_records", r);
      for (const auto& r : ga_logs) need_file("ga_logs", r);
      break;
  }
}

}  // namespace morphoplast
