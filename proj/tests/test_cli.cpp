#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bgnn/checkpoint.hpp"
#include "bgnn/cli.hpp"
#include "bgnn/dataset.hpp"
#include "support.hpp"

using namespace bgnn;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bgnn-test-cli-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string read_file(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string tiny() { return (test::data_dir() / "tiny").string(); }

std::vector<std::string> quick_train(const std::string& model, const fs::path& out) {
  return {"train", "--dataset", tiny(),        "--model",  model,        "--runs",
          "1",     "--seed",    "7",           "--epochs", "30",         "--patience",
          "10",    "--out",     out.string(), "--hidden", "4"};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"train", "--dataset", tiny(), "--model", "gcnn"}).code == kExitUsage);
  CHECK(run({"train", "--dataset", tiny(), "--alpha", "1.5"}).code == kExitUsage);
  CHECK(run({"train", "--dataset", tiny(), "--epochs"}).code == kExitUsage);
}

TEST_CASE("version and help exit 0") {
  const Result v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find(kToolVersion) != std::string::npos);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("missing dataset exits 2") {
  const Result r = run({"train", "--dataset", "/nonexistent/bgnn-dataset"});
  CHECK(r.code == kExitData);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"stats", "--dataset", "/nonexistent/bgnn-dataset"}).code == kExitData);
}

TEST_CASE("stats prints JSON for a valid dataset") {
  const Result r = run({"stats", "--dataset", tiny()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["num_nodes"] == 6);
}

TEST_CASE("train writes reports that are byte-identical across invocations") {
  const fs::path a = scratch("train-a"), b = scratch("train-b");
  const Result ra = run(quick_train("bgcn-t", a));
  const Result rb = run(quick_train("bgcn-t", b));
  REQUIRE(ra.code == kExitOk);
  REQUIRE(rb.code == kExitOk);
  CHECK(ra.out.find("test accuracy") != std::string::npos);
  for (const char* f : {"run-7.jsonl", "run-7.ckpt", "summary.json"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(read_file(a / f) == read_file(b / f));
  }
  CHECK(fs::exists(a / "manifest.json"));
  const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
  CHECK(manifest.contains("config"));

  const Checkpoint c = load_checkpoint(a / "run-7.ckpt");
  CHECK(c.config.seed == 7);
  CHECK(c.meta.dataset == "tiny");
}

TEST_CASE("config file is overridden by flags") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"variant": "gcn", "hidden_dim": 3, "dropout": 0.0})";
  auto args = quick_train("bgat-a", dir / "out");
  args.push_back("--config");
  args.push_back((dir / "cfg.json").string());
  REQUIRE(run(args).code == kExitOk);
  const Checkpoint c = load_checkpoint(dir / "out" / "run-7.ckpt");
  CHECK(c.config.variant == Variant::BGAT_A);
  CHECK(c.config.hidden_dim == 4);
  CHECK(c.config.dropout == 0.0);

  std::ofstream(dir / "bad.json") << R"({"hiden_dim": 3})";
  args.back() = (dir / "bad.json").string();
  CHECK(run(args).code == kExitUsage);
}

TEST_CASE("evaluate and analyze consume train checkpoints") {
  const fs::path base = scratch("base"), model = scratch("model"), out = scratch("analysis");
  REQUIRE(run(quick_train("gcn", base)).code == kExitOk);
  REQUIRE(run(quick_train("bgcn-t", model)).code == kExitOk);

  const Result e = run({"evaluate", "--dataset", tiny(), "--checkpoint",
                        (model / "run-7.ckpt").string(), "--out", out.string()});
  REQUIRE(e.code == kExitOk);
  const auto ev = nlohmann::json::parse(read_file(out / "evaluation.json"));
  const auto summary = nlohmann::json::parse(read_file(model / "summary.json"));
  CHECK(ev["test_acc"] == summary["per_run"][0]["test_acc"]);

  const Result a = run({"analyze", "--dataset", tiny(), "--baseline",
                        (base / "run-7.ckpt").string(), "--model",
                        (model / "run-7.ckpt").string(), "--out", out.string()});
  REQUIRE(a.code == kExitOk);
  std::istringstream csv(read_file(out / "analysis.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "category,count,mean_degree,mean_ratio");
  std::size_t total = 0, rows = 0;
  while (std::getline(csv, line)) {
    total += std::stoul(line.substr(line.find(',') + 1));
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(total == 2);
}

TEST_CASE("evaluate rejects a checkpoint from another dataset") {
  const fs::path model = scratch("other");
  REQUIRE(run(quick_train("gcn", model)).code == kExitOk);
  const fs::path synth = scratch("synth");
  REQUIRE(run({"synth", "--out", synth.string(), "--nodes", "200", "--val", "10", "--test", "10",
               "--features", "12"})
              .code == kExitOk);
  CHECK(load_dataset(synth).num_nodes() == 200);
  CHECK(run({"evaluate", "--dataset", synth.string(), "--checkpoint",
             (model / "run-7.ckpt").string(), "--out", scratch("other-eval").string()})
            .code == kExitData);
}

TEST_CASE("sweep figure mode writes both curves") {
  const fs::path out = scratch("sweep");
  const Result r = run({"sweep", "--dataset", tiny(), "--mode", "figure", "--model", "bgcn-t",
                        "--alpha-grid", "0,0.5", "--beta-grid", "0.5", "--alpha", "0.5",
                        "--runs", "1", "--epochs", "10", "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  const std::string alpha = read_file(out / "alpha.csv");
  const std::string beta = read_file(out / "beta.csv");
  CHECK(alpha.rfind("alpha,beta,runs,mean_val_acc,mean_test_acc,std_test_acc\n", 0) == 0);
  CHECK(std::count(alpha.begin(), alpha.end(), '\n') == 3);
  CHECK(std::count(beta.begin(), beta.end(), '\n') == 2);
}

TEST_CASE("sweep grid mode and empty grids") {
  const fs::path out = scratch("grid");
  const Result r = run({"sweep", "--dataset", tiny(), "--mode", "grid", "--model", "bgcn-a",
                        "--alpha-grid", "0.1", "--beta-grid", "0.5", "--dropout-grid", "0,0.5",
                        "--weight-decay-grid", "0", "--runs", "1", "--epochs", "10", "--out",
                        out.string()});
  REQUIRE(r.code == kExitOk);
  const std::string grid = read_file(out / "grid.jsonl");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 2);
  CHECK(fs::exists(out / "best.json"));

  CHECK(run({"sweep", "--dataset", tiny(), "--mode", "grid", "--alpha-grid", "",
             "--out", scratch("grid-empty").string()})
            .code == kExitUsage);
  CHECK(run({"sweep", "--dataset", tiny(), "--mode", "nope"}).code == kExitUsage);
}

TEST_CASE("gradcheck passes for every variant") {
  const Result r = run({"gradcheck", "--seed", "3"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("gradcheck fails under an impossible tolerance") {
  CHECK(run({"gradcheck", "--tolerance", "0"}).code == kExitNumeric);
}

TEST_CASE("bench prints one row per degree") {
  const fs::path csv = scratch("bench.csv");
  const Result r = run({"bench", "--nodes", "200", "--degrees", "2,4,8", "--dim", "4",
                        "--repeats", "1", "--csv", csv.string()});
  REQUIRE(r.code == kExitOk);
  const std::string table = read_file(csv);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}
