#include "bgnn/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>

#include <json.hpp>

#include "bgnn/error.hpp"
#include "bgnn/serialize.hpp"

namespace bgnn {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'G', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put(std::ostream& out, U x) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get(std::istream& in, const std::string& what) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw DataError("checkpoint truncated while reading " + what);
  }
  U x = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) x |= static_cast<U>(bytes[i]) << (8 * i);
  return x;
}

std::string get_string(std::istream& in, std::uint64_t n, const std::string& what) {
  if (n > (std::uint64_t{1} << 30)) throw DataError("checkpoint: implausible " + what + " length");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw DataError("checkpoint truncated while reading " + what);
  }
  return s;
}

}  // namespace

CheckpointMeta describe(const GraphDataset& data) {
  return {data.name, data.num_nodes(), data.num_features(), data.num_classes};
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + file.string());
  nlohmann::ordered_json header;
  header["config"] = config_to_json(ckpt.config);
  header["meta"] = {{"dataset", ckpt.meta.dataset},
                    {"num_nodes", ckpt.meta.num_nodes},
                    {"num_features", ckpt.meta.num_features},
                    {"num_classes", ckpt.meta.num_classes}};
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(out, ckpt.state.params.size());
  for (const auto& p : ckpt.state.params) {
    put<std::uint64_t>(out, p.name.size());
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint8_t>(out, p.decay ? 1 : 0);
    put<std::uint64_t>(out, p.value.rows());
    put<std::uint64_t>(out, p.value.cols());
    for (double x : p.value.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) throw DataError("failed writing checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + file.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw DataError(file.string() + ": not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw DataError(file.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  try {
    const auto header =
        nlohmann::json::parse(get_string(in, get<std::uint64_t>(in, "header"), "header"));
    ckpt.config = config_from_json(header.at("config"));
    const auto& meta = header.at("meta");
    ckpt.meta.dataset = meta.at("dataset").get<std::string>();
    ckpt.meta.num_nodes = meta.at("num_nodes").get<std::size_t>();
    ckpt.meta.num_features = meta.at("num_features").get<std::size_t>();
    ckpt.meta.num_classes = meta.at("num_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": bad checkpoint header: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(file.string() + ": bad checkpoint config: " + e.what());
  }

  const auto count = get<std::uint64_t>(in, "tensor count");
  for (std::uint64_t t = 0; t < count; ++t) {
    Parameter p;
    p.name = get_string(in, get<std::uint64_t>(in, "tensor name"), "tensor name");
    p.decay = get<std::uint8_t>(in, p.name) != 0;
    const auto rows = get<std::uint64_t>(in, p.name);
    const auto cols = get<std::uint64_t>(in, p.name);
    if (rows > (1u << 24) || cols > (1u << 24)) throw DataError("checkpoint: implausible shape of " + p.name);
    p.value = Matrix(rows, cols);
    for (double& x : p.value.data()) x = std::bit_cast<double>(get<std::uint64_t>(in, p.name));
    ckpt.state.params.push_back(std::move(p));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(file.string() + ": trailing bytes after the last tensor");
  }

  const ModelState expected =
      init_params(ckpt.config, {ckpt.meta.num_features, ckpt.meta.num_classes});
  if (expected.params.size() != ckpt.state.params.size()) {
    throw DataError(file.string() + ": expected " + std::to_string(expected.params.size()) +
                    " tensors, found " + std::to_string(ckpt.state.params.size()));
  }
  for (std::size_t i = 0; i < expected.params.size(); ++i) {
    const auto& want = expected.params[i];
    const auto& got = ckpt.state.params[i];
    if (want.name != got.name || !want.value.same_shape(got.value)) {
      throw DataError(file.string() + ": tensor " + std::to_string(i) + " is " + got.name + " " +
                      got.value.shape_string() + ", expected " + want.name + " " +
                      want.value.shape_string());
    }
  }
  return ckpt;
}

void check_compatible(const Checkpoint& ckpt, const GraphDataset& data) {
  const CheckpointMeta actual = describe(data);
  if (ckpt.meta == actual) return;
  throw DataError("checkpoint was trained on '" + ckpt.meta.dataset + "' (" +
                  std::to_string(ckpt.meta.num_nodes) + " nodes, " +
                  std::to_string(ckpt.meta.num_features) + " features, " +
                  std::to_string(ckpt.meta.num_classes) + " classes) but the dataset is '" +
                  actual.dataset + "' (" + std::to_string(actual.num_nodes) + " nodes, " +
                  std::to_string(actual.num_features) + " features, " +
                  std::to_string(actual.num_classes) + " classes)");
}

}  // namespace bgnn
