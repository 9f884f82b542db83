#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "actens/config.hpp"

using namespace actens;
using Catch::Matchers::ContainsSubstring;

namespace fs = std::filesystem;

namespace {

// Runs the installed command-line binary through the shell, capturing the
// merged stdout/stderr stream, and returns the exit code.
int run_cli(const std::string& args, std::string* captured = nullptr,
            const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + std::string(ACTENS_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, got);
  const int status = pclose(pipe);
  if (captured != nullptr) *captured = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const std::string kSmokeConfig =
    "# two tiny models on two tiny datasets\n"
    "[experiment]\n"
    "name = smoke\n"
    "seed = 9\n"
    "output = runout\n"
    "folds = 3\n"
    "hidden = 6\n"
    "\n"
    "[train]\n"
    "lr = 0.02\n"
    "epochs = 2\n"
    "batch_size = 16\n"
    "\n"
    "[data]\n"
    "synthetic two_moons 45 0.15\n"
    "synthetic blobs 45 0.3\n"
    "\n"
    "[models]\n"
    "relu\n"
    "prelu\n";

}  // namespace

TEST_CASE("sectioned config text parses into a run configuration") {
  const RunConfig cfg = parse_run_config(kSmokeConfig);
  CHECK(cfg.name == "smoke");
  CHECK(cfg.seed == 9);
  CHECK(cfg.seed_set);
  CHECK(cfg.output == "runout");
  CHECK(cfg.folds == 3);
  CHECK(cfg.hidden == std::vector<int>{6});
  CHECK(cfg.train.base_lr == 0.02);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.batch_size == 16);
  REQUIRE(cfg.data.size() == 2);
  CHECK(cfg.data[0].type == "synthetic");
  CHECK(cfg.data[0].kind == "two_moons");
  CHECK(cfg.data[0].n == 45);
  CHECK(cfg.data[0].noise == 0.15);
  CHECK(cfg.models == std::vector<std::string>{"relu", "prelu"});

  // Untouched keys keep their defaults.
  CHECK(cfg.max_input == 1.0);
  CHECK(cfg.stoc_members == 15);
  CHECK(cfg.train.last_layer_lr_mult == 20.0);
}

TEST_CASE("trailing comments are stripped from every config line shape") {
  const RunConfig cfg = parse_run_config(
      "[experiment]          ; section\n"
      "name = annotated      # key = value\n"
      "seed = 11\t# tab before the hash\n"
      "[data]\n"
      "synthetic blobs 40 0.1   # kind, samples, noise\n"
      "[models]\n"
      "prelu   ; bare entry\n");
  CHECK(cfg.name == "annotated");
  CHECK(cfg.seed == 11);
  REQUIRE(cfg.data.size() == 1);
  CHECK(cfg.data[0].kind == "blobs");
  CHECK(cfg.data[0].noise == 0.1);
  CHECK(cfg.models == std::vector<std::string>{"prelu"});
  // Only whitespace-preceded markers end a line; embedded ones are literal.
  const RunConfig path_cfg = parse_run_config(
      "[experiment]\nseed = 1\n[data]\ncsv runs#3/fold;a.csv\n[models]\nrelu\n");
  REQUIRE(path_cfg.data.size() == 1);
  CHECK(path_cfg.data[0].path == "runs#3/fold;a.csv");
}

TEST_CASE("JSON config text parses into the same structure") {
  const std::string text = R"({
    "experiment": {"name": "jsmoke", "seed": 5, "hidden": [8, 4], "max_input": 255},
    "train": {"lr": 0.001, "epochs": 3},
    "data": [{"type": "synthetic", "kind": "rings", "n": 40, "noise": 0.05}],
    "models": ["ENS", "melu_k8"]
  })";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.name == "jsmoke");
  CHECK(cfg.seed == 5);
  CHECK(cfg.hidden == std::vector<int>{8, 4});
  CHECK(cfg.max_input == 255.0);
  CHECK(cfg.train.base_lr == 0.001);
  CHECK(cfg.train.epochs == 3);
  REQUIRE(cfg.data.size() == 1);
  CHECK(cfg.data[0].kind == "rings");
  CHECK(cfg.models == std::vector<std::string>{"ENS", "melu_k8"});
}

TEST_CASE("config validation rejects malformed input") {
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nname = x\n[data]\nsynthetic blobs 40 0.1\n"
                                     "[models]\nrelu\n"),
                    ContainsSubstring("seed is required"));
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nseed = 1\n[models]\nrelu\n"),
                    ContainsSubstring("no datasets"));
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nseed = 1\n[data]\nsynthetic blobs 40 0.1\n"),
                    ContainsSubstring("no models"));
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nseed = 1\n[data]\nsynthetic blobs 40 0.1\n"
                                     "[models]\nnot_an_activation\n"),
                    ContainsSubstring("unknown model or recipe"));
  CHECK_THROWS_WITH(parse_run_config("[weird]\n"), ContainsSubstring("unknown section"));
  CHECK_THROWS_WITH(parse_run_config("stray = 1\n"), ContainsSubstring("before any section"));
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nbogus_key = 1\n"),
                    ContainsSubstring("unknown [experiment] key"));
  CHECK_THROWS_WITH(parse_run_config("[train]\nlr = -3\n"), ContainsSubstring("bad lr"));
  CHECK_THROWS_WITH(parse_run_config("[data]\nsynthetic blobs 5 0.1\n"),
                    ContainsSubstring("n >= 10"));
  CHECK_THROWS_WITH(parse_run_config("[data]\ncarrier pigeon\n"),
                    ContainsSubstring("unknown [data] entry type"));
  CHECK_THROWS_WITH(parse_run_config("{ not json"), ContainsSubstring("invalid JSON"));
  CHECK_THROWS_WITH(parse_run_config("[experiment]\nseed = -4\n"),
                    ContainsSubstring("non-negative"));
}

TEST_CASE("config resolution is deterministic and respects the seed chain") {
  const RunConfig cfg = parse_run_config(kSmokeConfig);
  const std::vector<Dataset> a = make_datasets(cfg);
  const std::vector<Dataset> b = make_datasets(cfg);
  REQUIRE(a.size() == 2);
  CHECK(a[0].name == "two_moons");
  CHECK(a[1].name == "blobs");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features.data == b[i].features.data);
    CHECK(a[i].labels == b[i].labels);
  }

  const std::vector<EnsembleDef> defs = make_defs(cfg);
  REQUIRE(defs.size() == 2);
  CHECK(defs[0].name == "relu");
  REQUIRE(defs[0].members.size() == 1);
  CHECK(defs[0].members[0].layer_acts == std::vector<std::string>{"relu"});

  const ProtocolConfig pc = make_protocol_config(cfg);
  CHECK(pc.folds == 3);
  CHECK(pc.master_seed == 9);
  CHECK(pc.hidden == std::vector<int>{6});
  CHECK(pc.train.epochs == 2);
}

TEST_CASE("config hashes are stable fingerprints") {
  const std::string h1 = config_hash(kSmokeConfig);
  const std::string h2 = config_hash(kSmokeConfig);
  const std::string h3 = config_hash(kSmokeConfig + " ");
  CHECK(h1.size() == 16);
  CHECK(h1 == h2);
  CHECK(h1 != h3);
  for (const char c : h1) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
}

TEST_CASE("cli: list prints the full registry") {
  std::string out;
  REQUIRE(run_cli("list", &out) == 0);
  CHECK_THAT(out, ContainsSubstring("name"));
  CHECK_THAT(out, ContainsSubstring("melu_k8"));
  CHECK_THAT(out, ContainsSubstring("symmetric_galu"));

  std::istringstream is(out);
  std::string line;
  REQUIRE(std::getline(is, line));  // header
  std::vector<std::string> names;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    names.push_back(first);
  }
  CHECK(names.size() == 24);
  CHECK(std::is_sorted(names.begin(), names.end()));
}

TEST_CASE("cli: gradcheck validates named activations") {
  std::string out;
  REQUIRE(run_cli("gradcheck --kinds relu --kinds prelu", &out) == 0);
  CHECK_THAT(out, ContainsSubstring("ok   relu"));
  CHECK_THAT(out, ContainsSubstring("ok   prelu"));
  CHECK_THAT(out, !ContainsSubstring("FAIL"));

  CHECK(run_cli("gradcheck --kinds not_a_kind", &out) == 2);
  CHECK_THAT(out, ContainsSubstring("unknown activation"));
}

TEST_CASE("cli: run executes a config and writes the result tree") {
  const fs::path work = fresh_dir("actens_cli_run");
  const fs::path cfg_path = work / "exp.ini";
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << kSmokeConfig;
  }
  const std::string env = "ACTENS_OUTPUT_ROOT=" + work.string() + " ";

  std::string out;
  REQUIRE(run_cli("run " + cfg_path.string(), &out, env) == 0);
  CHECK_THAT(out, ContainsSubstring("model"));
  CHECK_THAT(out, ContainsSubstring("relu"));
  CHECK_THAT(out, ContainsSubstring("wrote"));

  const fs::path run_dir = work / "runout";
  REQUIRE(fs::exists(run_dir / "performance.csv"));
  REQUIRE(fs::exists(run_dir / "performance.json"));
  REQUIRE(fs::exists(run_dir / "manifest.json"));
  for (const std::string model : {"relu", "prelu"})
    for (const std::string ds : {"two_moons", "blobs"})
      REQUIRE(fs::exists(run_dir / "scores" / model / (ds + ".csv")));

  const PerformanceTable table = read_performance_csv((run_dir / "performance.csv").string());
  CHECK(table.models == std::vector<std::string>{"relu", "prelu"});
  CHECK(table.datasets == std::vector<std::string>{"two_moons", "blobs"});
  for (const auto& row : table.cells)
    for (const double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }

  const nlohmann::json man = nlohmann::json::parse(slurp(run_dir / "manifest.json"));
  CHECK(man.at("experiment") == "smoke");
  CHECK(man.at("config_hash") == config_hash(kSmokeConfig));
  CHECK(man.at("master_seed").get<std::uint64_t>() == 9);

  const nlohmann::json perf = nlohmann::json::parse(slurp(run_dir / "performance.json"));
  CHECK(perf.at("models").get<std::vector<std::string>>() == table.models);

  // A second run from the same config reproduces the table byte for byte.
  const fs::path work2 = fresh_dir("actens_cli_run2");
  const fs::path cfg2 = work2 / "exp.ini";
  fs::copy_file(cfg_path, cfg2);
  REQUIRE(run_cli("run " + cfg2.string(), &out, "ACTENS_OUTPUT_ROOT=" + work2.string() + " ") == 0);
  CHECK(slurp(run_dir / "performance.csv") == slurp(work2 / "runout" / "performance.csv"));
  CHECK(slurp(run_dir / "scores" / "relu" / "blobs.csv") ==
        slurp(work2 / "runout" / "scores" / "relu" / "blobs.csv"));

  fs::remove_all(work);
  fs::remove_all(work2);
}

TEST_CASE("cli: run rejects bad configs with a distinct exit code") {
  const fs::path work = fresh_dir("actens_cli_badcfg");
  const fs::path cfg_path = work / "bad.ini";
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << "[experiment]\nname = broken\n[data]\nsynthetic blobs 40 0.1\n[models]\nrelu\n";
  }
  std::string out;
  CHECK(run_cli("run " + cfg_path.string(), &out) == 2);
  CHECK_THAT(out, ContainsSubstring("seed is required"));

  CHECK(run_cli("run " + (work / "missing.ini").string(), &out) == 2);
  CHECK_THAT(out, ContainsSubstring("cannot open"));
  fs::remove_all(work);
}

TEST_CASE("cli: compare runs the signed-rank test on two table rows") {
  const fs::path work = fresh_dir("actens_cli_cmp");
  const fs::path table = work / "perf.csv";
  {
    std::ofstream out(table, std::ios::binary);
    out << "model,d1,d2,d3,d4,d5,Avg\n";
    out << "strong,0.9,0.8,0.95,0.85,0.9,0.88\n";
    out << "weak,0.7,0.6,0.8,0.65,0.7,0.69\n";
    out << "clone,0.7,0.6,0.8,0.65,0.7,0.69\n";
  }

  std::string out;
  REQUIRE(run_cli("compare " + table.string() + " strong weak", &out) == 0);
  CHECK_THAT(out, ContainsSubstring("strong vs weak"));
  CHECK_THAT(out, ContainsSubstring("p two-sided"));
  CHECK_THAT(out, ContainsSubstring("first above second"));

  REQUIRE(run_cli("compare " + table.string() + " weak clone", &out) == 0);
  CHECK_THAT(out, ContainsSubstring("all paired differences are zero"));

  CHECK(run_cli("compare " + table.string() + " strong nobody", &out) == 2);
  CHECK_THAT(out, ContainsSubstring("not found"));

  CHECK(run_cli("compare " + (work / "none.csv").string() + " a b", &out) == 2);
  fs::remove_all(work);
}

TEST_CASE("cli: bad invocations exit with a usage error") {
  std::string out;
  CHECK(run_cli("", &out) == 2);
  CHECK(run_cli("frobnicate", &out) == 2);
  CHECK(run_cli("--help", &out) == 0);
  CHECK_THAT(out, ContainsSubstring("list"));
}
