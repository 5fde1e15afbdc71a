#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "bgnn/dataset.hpp"
#include "bgnn/diagnostics.hpp"
#include "bgnn/error.hpp"
#include "bgnn/synthetic.hpp"
#include "support.hpp"

using namespace bgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bgnn-test-dataset-" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path copy_tiny(const std::string& name) {
  const fs::path dir = scratch(name);
  fs::copy(test::data_dir() / "tiny", dir);
  return dir;
}

void append(const fs::path& file, const std::string& text) {
  std::ofstream(file, std::ios::app) << text;
}

std::string error_of(const fs::path& dir) {
  try {
    load_dataset(dir);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled tiny fixture loads with its hand-written masks") {
  const GraphDataset data = load_dataset(test::data_dir() / "tiny");
  CHECK(data.name == "tiny");
  CHECK(data.num_nodes() == 6);
  CHECK(data.num_features() == 4);
  CHECK(data.num_classes == 2);
  CHECK(data.split.train == std::vector<NodeId>{0, 3});
  CHECK(data.split.val == std::vector<NodeId>{1, 4});
  CHECK(data.split.test == std::vector<NodeId>{2, 5});
  CHECK(data.adjacency.nnz() == 14);
  CHECK(data.adjacency.contains(3, 2));
  CHECK(validate(data).empty());
  CHECK(data == tiny_dataset());
}

TEST_CASE("stats of the tiny fixture") {
  const DatasetStats s = stats(tiny_dataset());
  CHECK(s.num_nodes == 6);
  CHECK(s.nnz == 14);
  CHECK(s.train == 2);
  CHECK(s.isolated == 0);
  CHECK(std::accumulate(s.degree_histogram.begin(), s.degree_histogram.end(), std::size_t{0}) == 6);
  CHECK(s.degree_histogram[2] == 4);
  CHECK(s.degree_histogram[3] == 2);
}

TEST_CASE("degree histogram sums to N on random datasets") {
  Rng rng = make_rng(60, Stream::Synthetic);
  const GraphDataset data = synthetic_citation({}, rng);
  const DatasetStats s = stats(data);
  CHECK(std::accumulate(s.degree_histogram.begin(), s.degree_histogram.end(), std::size_t{0}) ==
        data.num_nodes());
}

TEST_CASE("save then load is the identity") {
  Rng rng = make_rng(61, Stream::Synthetic);
  GraphDataset data = synthetic_citation({}, rng);
  // Non-binary values exercise the float round trip.
  data.features(0, 1) = 0.1;
  data.features(3, 7) = 1.0 / 3.0;
  data.features(5, 0) = -2.5e-17;
  const fs::path dir = scratch("roundtrip");
  save_dataset(data, dir);
  CHECK(load_dataset(dir) == data);
  row_normalize(data.features);
  save_dataset(data, dir);
  CHECK(load_dataset(dir) == data);
}

TEST_CASE("edge order and orientation do not matter") {
  const fs::path dir = copy_tiny("order");
  std::vector<std::string> lines;
  {
    std::ifstream in(dir / "graph.edges");
    for (std::string l; std::getline(in, l);) {
      std::istringstream ss(l);
      std::string u, v;
      ss >> u >> v;
      lines.push_back(lines.size() % 2 ? v + " " + u : u + " " + v);
    }
  }
  std::mt19937 gen(5);
  std::shuffle(lines.begin(), lines.end(), gen);
  {
    std::ofstream out(dir / "graph.edges");
    for (const auto& l : lines) out << l << '\n';
  }
  CHECK(load_dataset(dir).adjacency == tiny_dataset().adjacency);
}

TEST_CASE("out-of-range edge names the offending line") {
  const fs::path dir = copy_tiny("range");
  append(dir / "graph.edges", "1 9\n");
  const std::string msg = error_of(dir);
  CHECK(msg.find("graph.edges:8") != std::string::npos);
  CHECK(msg.find("9") != std::string::npos);
}

TEST_CASE("duplicate edges are rejected") {
  const fs::path dir = copy_tiny("dup");
  append(dir / "graph.edges", "1 0\n");
  CHECK(error_of(dir).find("graph.edges:8: duplicate edge") != std::string::npos);
}

TEST_CASE("missing files are reported") {
  const fs::path dir = copy_tiny("missing");
  fs::remove(dir / "labels.txt");
  CHECK(error_of(dir).find("labels.txt") != std::string::npos);
}

TEST_CASE("labels out of range and mask overlaps fail validation") {
  const fs::path dir = copy_tiny("labels");
  std::ofstream(dir / "labels.txt") << "0\n0\n0\n1\n2\n1\n";
  CHECK(error_of(dir).find("label 2 of node 4") != std::string::npos);

  const fs::path dir2 = copy_tiny("overlap");
  std::ofstream(dir2 / "split.val") << "0\n4\n";
  CHECK(error_of(dir2).find("train and val") != std::string::npos);
}

TEST_CASE("malformed lines are rejected") {
  const fs::path dir = copy_tiny("garbage");
  std::ofstream(dir / "features.sparse") << "0:1 2:1\n0:x\n0:1 1:1\n1:1 3:1\n3:1\n2:1 3:1\n";
  CHECK(error_of(dir).find("features.sparse:2") != std::string::npos);

  const fs::path dir2 = copy_tiny("unsorted");
  std::ofstream(dir2 / "split.test") << "5\n2\n";
  CHECK(error_of(dir2).find("split.test:2") != std::string::npos);

  const fs::path dir3 = copy_tiny("short");
  std::ofstream(dir3 / "labels.txt") << "0\n0\n";
  CHECK_FALSE(error_of(dir3).empty());
}

TEST_CASE("validate reports each violation") {
  CHECK(validate(tiny_dataset()).empty());

  GraphDataset overlap = tiny_dataset();
  overlap.split.val = {0, 4};
  const auto v1 = validate(overlap);
  REQUIRE(v1.size() == 1);
  CHECK(v1[0].find("train") != std::string::npos);
  CHECK(v1[0].find("val") != std::string::npos);

  const fs::path dir = copy_tiny("selfloop");
  append(dir / "graph.edges", "5 5\n");
  const GraphDataset looped = load_dataset(dir, {false});
  const auto v2 = validate(looped);
  REQUIRE(v2.size() == 1);
  CHECK(v2[0] == "self-loop on node 5");
  CHECK(error_of(dir).find("self-loop on node 5") != std::string::npos);
}

TEST_CASE("row_normalize") {
  Matrix m{{1, 3}, {0, 0}, {2, 2}};
  row_normalize(m);
  CHECK(m == Matrix{{0.25, 0.75}, {0, 0}, {0.5, 0.5}});
}
