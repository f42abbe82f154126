#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "morphoplast/evaluation.hpp"

namespace morphoplast {

enum class ExperimentKind { pool, sweep, nonstationary, off_on, dose_response, coevolve, random_control, report };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view s);

// Run configuration. The file format is one "key = value" per line; '#'
// starts a comment; blank lines are ignored; unknown keys are errors. See
// README for the key list.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::pool;
  std::string env = "cartpole";  // EnvSpec descriptor, e.g. cartpole+pole_mass_x10@200
  std::size_t grid_width = 10;
  std::size_t grid_height = 10;
  std::size_t iterations = 200;
  std::size_t genomes = 0;        // pool: number of random genomes
  std::uint64_t genome_seed = 0;  // genome i is sample_random(genome_seed + i)
  std::string genome_file;        // pool: read genomes instead of sampling
  std::string pool_file;          // network JSONL produced by a pool run
  std::string sweep_grid = "primary75";
  std::vector<Stratum> strata;    // networks swept / controlled; empty = all
  std::size_t max_networks = 0;   // 0 = no limit
  std::vector<std::uint64_t> seeds = default_seeds();
  std::string output_dir;         // default: $MORPHOPLAST_OUTPUT_ROOT/<kind> or runs/<kind>
  std::vector<int> switch_times = {100, 200, 300, 400};
  std::string condition = "C";
  std::size_t runs = 1;
  std::uint64_t run_seed = 0;     // run r uses run_seed + r
  int generations = 200;
  std::size_t population = 50;
  std::optional<double> stop_at_fitness;
  std::size_t replicates = 5;
  std::uint64_t control_seed = 0;
  bool match_roles = true;
  double degenerate_tolerance = 0.0;  // max fraction of degenerate episodes
  std::vector<std::string> records;   // report inputs
  std::vector<std::string> ns_records;
  std::vector<std::string> ga_logs;
  std::size_t snapshot_every = 10;

  // Canonical "key=value" lines in key order, every field included.
  std::string canonical() const;
  nlohmann::ordered_json to_json() const;
  std::string hash() const;  // 16 hex digits
  // Checks ranges and that referenced files exist. Throws
  // std::invalid_argument with a descriptive message.
  void validate() const;
  // The seed recorded in provenance headers.
  std::uint64_t primary_seed() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

std::vector<std::uint64_t> parse_seed_list(std::string_view s);  // "42-61" or "1,2,5"
std::string format_seed_list(const std::vector<std::uint64_t>& s);

}  // namespace morphoplast
