#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "morphoplast/config.hpp"
#include "morphoplast/evaluation.hpp"
#include "morphoplast/evolution.hpp"
#include "morphoplast/network.hpp"
#include "morphoplast/records.hpp"
#include "morphoplast/sweep_analysis.hpp"

namespace morphoplast {

inline constexpr const char* kOutputRootEnv = "MORPHOPLAST_OUTPUT_ROOT";

struct RunOptions {
  std::size_t workers = 1;
  bool resume = false;
  bool snapshot_development = false;
  std::ostream* log = nullptr;  // progress lines; nullptr = silent
};

struct RunResult {
  std::string output_dir;
  std::vector<std::string> files;
  std::size_t new_evaluations = 0;
  std::size_t episodes = 0;
  std::size_t degenerate_episodes = 0;
  bool degenerate_exceeded = false;  // fraction above the configured tolerance
};

// output_dir from the config, else $MORPHOPLAST_OUTPUT_ROOT/<kind>, else
// runs/<kind>.
std::string resolve_output_dir(const RunConfig& cfg);

Provenance make_provenance(const RunConfig& cfg, const std::string& schema);

// Validates the config first (nothing is written for an invalid one), then
// runs the named pipeline.
RunResult run_experiment(const RunConfig& cfg, const RunOptions& opt = {});

// Networks from a pool file, first occurrence of each id kept.
std::vector<DevelopedNetwork> load_unique_networks(const std::string& path);

// Static-spec baseline stratum per network.
std::map<std::string, Stratum> stratify_networks(const std::vector<DevelopedNetwork>& nets, const EnvSpec& spec,
                                                 const std::vector<std::uint64_t>& seeds, std::size_t workers,
                                                 BaselineCache& cache);

// One row of the per-stratum impact table.
struct StratumRow {
  std::string spec;
  std::string mode;
  Stratum stratum = Stratum::Weak;
  std::size_t n = 0;
  double oracle_delta = 0.0;
  double pct_improved = 0.0;  // fraction with oracle delta > 0
  PlasticityParams best_fixed;
  double best_fixed_delta = 0.0;
  std::optional<double> regret;
  double harm_rate_best_fixed = 0.0;
  std::optional<double> cohens_d;  // anti minus Hebbian pools
  std::optional<double> mw_p;
  std::optional<double> mw_p_bonferroni;
  std::optional<double> headroom;  // mean over networks with baseline <= max - 1
  std::optional<double> split_half_retained;
  std::optional<double> eps2_eta;
  std::optional<double> eps2_lambda;
  std::optional<double> dw_ratio;  // post/pre |dw| at the oracle params, mean over networks
  std::optional<double> ns_pct_helped;
  std::optional<double> premium;
};

struct ReportTables {
  std::vector<StratumRow> rows;
  std::vector<std::string> heatmap;     // csv rows
  std::vector<std::string> survival;    // csv rows
  std::vector<std::string> quintiles;   // csv rows
};

// Builds all record-derived tables. `static_baselines` decide strata. Throws
// std::invalid_argument listing missing keys when a network lacks a grid
// point another network has, or lacks its static baseline.
ReportTables build_report(const std::vector<EvalRecord>& records, const std::vector<EvalRecord>& ns_records);

std::string table1_header();
std::string table1_row(const StratumRow& r);
std::string table2_header();
std::string table2_row(const StratumRow& r);

// Rebuilds the summary fields of a GA log from its JSONL file.
GARunLog ga_log_from_jsonl(const std::string& path);

}  // namespace morphoplast
