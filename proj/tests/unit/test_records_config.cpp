#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "morphoplast/config.hpp"
#include "morphoplast/records.hpp"

using namespace morphoplast;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalRecord sample_record() {
  EvalRecord r;
  r.network_id = "00000000000000ab";
  r.spec = "cartpole+gravity_x2@200";
  r.params = {-0.005, 1e-4};
  r.mode = Mode::plastic;
  r.rewards = {12, 500, 77};
  r.mean_reward = 589.0 / 3.0;
  r.delta_r = 0.1 + 0.2;
  r.dw_pre = {0.001, std::nan(""), 0.5};
  r.dw_post = {0.002, 0.0, 1e-300};
  r.solved_steps = {std::nullopt, std::nullopt, std::nullopt};
  r.degenerate_episodes = 1;
  return r;
}

}  // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("42-61").size() == 20);
  CHECK(parse_seed_list("1, 2,5") == std::vector<std::uint64_t>{1, 2, 5});
  CHECK(format_seed_list(parse_seed_list("42-61")) == "42-61");
  CHECK(format_seed_list({1, 2, 5}) == "1,2,5");
  CHECK_THROWS(parse_seed_list("5-3"));
  CHECK_THROWS(parse_seed_list("x"));
}

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment\n"
      "kind = sweep\n"
      "env = cartpole+pole_mass_x10@200   # trailing\n"
      "\n"
      "strata = LowMid,HighMid\n"
      "seeds = 1-3\n"
      "stop_at_fitness = 1.0\n");
  CHECK(c.kind == ExperimentKind::sweep);
  CHECK(c.env == "cartpole+pole_mass_x10@200");
  CHECK(c.strata == std::vector<Stratum>{Stratum::LowMid, Stratum::HighMid});
  CHECK(c.seeds.size() == 3);
  CHECK(*c.stop_at_fitness == 1.0);
  CHECK(c.primary_seed() == 1);
  CHECK_THROWS_WITH(parse_config("kind = pool\nbogus = 1\n"), doctest::Contains("line 2"));
  CHECK_THROWS_WITH(parse_config("genomes = many\n"), doctest::Contains("genomes"));
  CHECK_THROWS(parse_config("just words\n"));
  CHECK_THROWS(parse_config("match_roles = maybe\n"));
}

TEST_CASE("canonical form round trips and hashes stably") {
  RunConfig c;
  c.kind = ExperimentKind::coevolve;
  c.runs = 3;
  c.condition = "B";
  const auto again = parse_config(c.canonical());
  CHECK(again.canonical() == c.canonical());
  CHECK(again.hash() == c.hash());
  RunConfig d = c;
  d.runs = 4;
  CHECK(d.hash() != c.hash());
  CHECK(c.to_json()["runs"] == "3");
  CHECK(c.primary_seed() == c.run_seed);
}

TEST_CASE("validation") {
  RunConfig c;
  c.kind = ExperimentKind::sweep;
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("pool_file"));
  c.pool_file = "/definitely/not/here.jsonl";
  CHECK_THROWS_WITH(c.validate(), doctest::Contains("does not exist"));
  RunConfig p;
  p.grid_width = 1;
  CHECK_THROWS(p.validate());
  p = RunConfig{};
  p.env = "pendulum";
  CHECK_THROWS(p.validate());
  p = RunConfig{};
  CHECK_NOTHROW(p.validate());
  RunConfig r;
  r.kind = ExperimentKind::report;
  CHECK_THROWS(r.validate());
}

TEST_CASE("record json round trip") {
  const auto r = sample_record();
  const auto j = record_to_json(r);
  CHECK(j["key"] == r.key());
  CHECK(j["dw_pre"][1].is_null());
  const auto back = record_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.key() == r.key());
  CHECK(back.rewards == r.rewards);
  CHECK(back.delta_r == r.delta_r);
  CHECK(back.mean_reward == r.mean_reward);
  CHECK(std::isnan(back.dw_pre[1]));
  CHECK(back.dw_post[2] == 1e-300);
  CHECK(back.degenerate_episodes == 1);
}

TEST_CASE("appender resume keeps complete lines and drops torn ones") {
  const auto dir = fs::temp_directory_path() / "mp_appender_test";
  fs::remove_all(dir);
  const std::string path = (dir / "r.jsonl").string();
  Provenance prov;
  prov.schema = "test";
  prov.config_hash = "abc";
  prov.seed = 7;
  auto key_of = [](const nlohmann::json& j) { return j.at("k").get<std::string>(); };
  {
    JsonlAppender a(path, prov, false, key_of);
    a.append("1", R"({"k":"1"})");
    a.append("2", R"({"k":"2"})");
    a.append("2", R"({"k":"2"})");
    CHECK(a.written() == 2);
  }
  const std::string full = slurp(path);
  { std::ofstream(path, std::ios::app) << R"({"k":"3","tor)"; }
  {
    JsonlAppender a(path, prov, true, key_of);
    CHECK(a.existing() == 2);
    CHECK(a.has("1"));
    CHECK_FALSE(a.has("3"));
  }
  CHECK(slurp(path) == full);
  {
    JsonlAppender a(path, prov, true, key_of);
    a.append("3", R"({"k":"3"})");
  }
  const auto f = read_jsonl(path);
  CHECK(f.header["schema"] == "test");
  CHECK(f.header["schema_version"] == kRecordSchemaVersion);
  CHECK(f.lines.size() == 3);
  Provenance other = prov;
  other.config_hash = "def";
  CHECK_THROWS(JsonlAppender(path, other, true, key_of));
  {
    JsonlAppender a(path, prov, false, key_of);
    CHECK(a.existing() == 0);
  }
  CHECK(read_jsonl(path).lines.empty());
  fs::remove_all(dir);
}

TEST_CASE("csv output carries the provenance comment") {
  const auto path = (fs::temp_directory_path() / "mp_csv_test.csv").string();
  Provenance prov;
  prov.schema = "t";
  prov.config_hash = "0123";
  prov.seed = 5;
  write_csv(path, prov, "a,b", {"1,2"});
  const auto text = slurp(path);
  CHECK(text.rfind("# schema=t schema_version=1 config_hash=0123 code_version=" + code_version() + " seed=5\n", 0) == 0);
  CHECK(text.find("\na,b\n1,2\n") != std::string::npos);
  fs::remove(path);
  CHECK(fmt_double(0.1) == "0.1");
  CHECK(fmt_double(std::nan("")) == "nan");
  CHECK_THROWS(read_jsonl("/no/such/file.jsonl"));
}
