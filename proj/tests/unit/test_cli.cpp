#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using std::string;
namespace fs = std::filesystem;

namespace {

string cli() {
  const char* p = std::getenv("MORPHOPLAST_CLI");
  REQUIRE_MESSAGE(p, "MORPHOPLAST_CLI must point at the built binary");
  return p;
}

int run(const string& args, const string& env = "") {
  const string cmd = env + " " + cli() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("exit codes and outputs") {
  const auto dir = fs::temp_directory_path() / "mp_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  CHECK(run("") != 0);
  CHECK(run("pool") != 0);                                    // --config required
  CHECK(run("pool --config " + (dir / "nope.cfg").string()) != 0);

  write(dir / "bad.cfg", "genomes = 3\nfrobnicate = 1\n");
  CHECK(run("pool --config " + (dir / "bad.cfg").string()) == 2);

  write(dir / "wrong_kind.cfg", "kind = coevolve\n");
  CHECK(run("pool --config " + (dir / "wrong_kind.cfg").string()) == 2);

  write(dir / "pool.cfg", "genomes = 4\ngenome_seed = 20000\noutput_dir = " + (dir / "pool").string() + "\n");
  CHECK(run("pool --workers 2 --snapshot-development --set snapshot_every=100 --config " +
            (dir / "pool.cfg").string()) == 0);
  CHECK(fs::exists(dir / "pool" / "networks.jsonl"));
  CHECK(fs::exists(dir / "pool" / "snapshots" / "genome_0" / "iter_00100.csv"));
  CHECK(fs::exists(dir / "pool" / "snapshots" / "genome_3" / "iter_00200.csv"));
  const string header = slurp(dir / "pool" / "pool_summary.csv");
  CHECK(header.rfind("# schema=morphoplast.pool_summary", 0) == 0);

  // reruns are byte-identical, including provenance
  CHECK(run("pool -q --set snapshot_every=100 --config " + (dir / "pool.cfg").string()) == 0);
  CHECK(slurp(dir / "pool" / "pool_summary.csv") == header);
  // a different config changes the provenance line
  CHECK(run("pool -q --config " + (dir / "pool.cfg").string()) == 0);
  CHECK(slurp(dir / "pool" / "pool_summary.csv") != header);

  // default output root comes from the environment
  write(dir / "rooted.cfg", "genomes = 1\n");
  CHECK(run("pool -q --config " + (dir / "rooted.cfg").string(), "MORPHOPLAST_OUTPUT_ROOT=" + (dir / "root").string()) ==
        0);
  CHECK(fs::exists(dir / "root" / "pool" / "genomes.csv"));

  write(dir / "sweep.cfg", "pool_file = " + (dir / "pool" / "networks.jsonl").string() +
                               "\nseeds = 42-43\nsweep_grid = coarse22\noutput_dir = " + (dir / "sweep").string() +
                               "\n");
  CHECK(run("sweep -q --workers 3 --config " + (dir / "sweep.cfg").string()) == 0);
  const string recs = slurp(dir / "sweep" / "records.jsonl");
  CHECK(run("sweep -q --resume --config " + (dir / "sweep.cfg").string()) == 0);
  CHECK(slurp(dir / "sweep" / "records.jsonl") == recs);
  // changing the config invalidates resume
  CHECK(run("sweep -q --resume --set seeds=42 --config " + (dir / "sweep.cfg").string()) == 1);

  fs::remove_all(dir);
}
