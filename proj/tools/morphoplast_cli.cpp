#include <cstdlib>
#include <fstream>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "morphoplast/config.hpp"
#include "morphoplast/experiments.hpp"
#include "morphoplast/simd/kernels.hpp"

namespace mp = morphoplast;

namespace {

struct Command {
  std::string name;
  mp::ExperimentKind default_kind;
  std::vector<mp::ExperimentKind> allowed;
};

const std::vector<Command>& commands() {
  using K = mp::ExperimentKind;
  static const std::vector<Command> c = {
      {"pool", K::pool, {K::pool}},
      {"sweep", K::sweep, {K::sweep, K::nonstationary, K::off_on, K::dose_response}},
      {"coevolve", K::coevolve, {K::coevolve}},
      {"control", K::random_control, {K::random_control}},
      {"report", K::report, {K::report}},
  };
  return c;
}

// A config without a kind line takes the subcommand's default kind.
bool has_kind_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto p = line.find_first_not_of(" \t");
    if (p != std::string::npos && line.compare(p, 4, "kind") == 0) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphoplast: developmental networks with synaptic plasticity"};
  app.require_subcommand(1);
  std::string config_path;
  std::size_t workers = 1;
  bool resume = false, snapshots = false, quiet = false;
  std::vector<std::string> overrides;

  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, "run a " + c.name + " experiment from a config file");
    sub->add_option("--config", config_path, "key = value run config")->required()->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--resume", resume, "keep existing records and skip their keys");
    sub->add_flag("--snapshot-development", snapshots, "dump developmental grid snapshots (pool)");
    sub->add_option("--set", overrides, "extra 'key=value' lines applied after the file");
    sub->add_flag("-q,--quiet", quiet, "no progress output");
  }
  CLI11_PARSE(app, argc, argv);

  const auto* chosen = app.get_subcommands().front();
  const Command* cmd = nullptr;
  for (const auto& c : commands()) {
    if (c.name == chosen->get_name()) cmd = &c;
  }

  mp::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (!has_kind_line(config_path)) text = "kind = " + mp::to_string(cmd->default_kind) + "\n" + text;
    for (const auto& o : overrides) text += "\n" + o;
    cfg = mp::parse_config(text);
    bool ok = false;
    for (auto k : cmd->allowed) ok = ok || k == cfg.kind;
    if (!ok) {
      std::cerr << "error: kind '" << mp::to_string(cfg.kind) << "' cannot run under '" << cmd->name << "'\n";
      return 2;
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  mp::RunOptions opt;
  opt.workers = workers;
  opt.resume = resume;
  opt.snapshot_development = snapshots;
  opt.log = quiet ? nullptr : &std::cerr;
  try {
    const mp::RunResult res = mp::run_experiment(cfg, opt);
    if (!quiet) {
      std::cerr << "simd: " << mp::simd::isa_name(mp::simd::active_isa()) << "\n";
      std::cerr << "new evaluations: " << res.new_evaluations << "\n";
    }
    for (const auto& f : res.files) std::cout << f << '\n';
    if (res.degenerate_exceeded) {
      std::cerr << "error: " << res.degenerate_episodes << " of " << res.episodes
                << " episodes degenerate, above degenerate_tolerance\n";
      return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
