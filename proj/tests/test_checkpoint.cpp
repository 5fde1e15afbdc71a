#include <doctest.h>

#include <fstream>

#include "bgnn/checkpoint.hpp"
#include "bgnn/diagnostics.hpp"
#include "bgnn/error.hpp"
#include "bgnn/serialize.hpp"

using namespace bgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / ("bgnn-test-ckpt-" + name);
}

Checkpoint sample(Variant v = Variant::BGAT_T) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.alpha = 0.3;
  cfg.beta = two_hop_beta(0.7);
  cfg.seed = 12;
  cfg.hop_mode = HopMode::WithinK;
  const GraphDataset data = tiny_dataset();
  return {cfg, describe(data), init_params(cfg, {data.num_features(), data.num_classes})};
}

std::string bytes_of(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("config JSON round-trips and rejects unknown keys") {
  const ModelConfig cfg = sample().config;
  const ModelConfig back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"alpah", 0.1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"layers", "two"}}), ConfigError);
  CHECK(config_from_json(nlohmann::json::object()).layers == ModelConfig{}.layers);
}

TEST_CASE("checkpoint round trip is exact") {
  for (Variant v : kAllVariants) {
    const Checkpoint c = sample(v);
    const fs::path f = scratch("roundtrip");
    save_checkpoint(c, f);
    const Checkpoint back = load_checkpoint(f);
    CHECK(back.state == c.state);
    CHECK(back.meta == c.meta);
    CHECK(config_to_json(back.config) == config_to_json(c.config));
  }
}

TEST_CASE("checkpoint bytes are stable and little-endian") {
  const Checkpoint c = sample();
  save_checkpoint(c, scratch("a"));
  save_checkpoint(c, scratch("b"));
  const std::string a = bytes_of(scratch("a"));
  CHECK(a == bytes_of(scratch("b")));
  CHECK(a.substr(0, 8) == "BGNNCKPT");
  CHECK(a[8] == 1);
  CHECK(a[9] == 0);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const Checkpoint c = sample();
  const fs::path f = scratch("corrupt");
  save_checkpoint(c, f);
  const std::string good = bytes_of(f);

  std::ofstream(f, std::ios::binary) << good.substr(0, good.size() - 3);
  CHECK_THROWS_AS(load_checkpoint(f), DataError);

  std::ofstream(f, std::ios::binary) << "NOTACKPT" << good.substr(8);
  CHECK_THROWS_AS(load_checkpoint(f), DataError);

  std::ofstream(f, std::ios::binary) << good << 'x';
  CHECK_THROWS_AS(load_checkpoint(f), DataError);

  Checkpoint wrong = c;
  wrong.meta.num_features += 1;
  save_checkpoint(wrong, f);
  CHECK_THROWS_AS(load_checkpoint(f), DataError);

  CHECK_THROWS_AS(load_checkpoint(scratch("does-not-exist")), DataError);
}

TEST_CASE("dataset mismatch is detected") {
  const Checkpoint c = sample();
  CHECK_NOTHROW(check_compatible(c, tiny_dataset()));
  GraphDataset other = gradcheck_dataset(0);
  CHECK_THROWS_AS(check_compatible(c, other), DataError);
  GraphDataset renamed = tiny_dataset();
  renamed.name = "cora";
  CHECK_THROWS_AS(check_compatible(c, renamed), DataError);
}
