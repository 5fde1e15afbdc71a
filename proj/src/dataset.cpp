#include "bgnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "bgnn/error.hpp"

namespace bgnn {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits on '\n'. A trailing newline terminates the last line rather than
// opening an empty one.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& what) {
  throw DataError(file.filename().string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(file, line, "cannot parse '" + std::string(token) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view token, std::size_t bound, const fs::path& file,
                        std::size_t line) {
  const auto value = parse_number<std::uint64_t>(token, file, line);
  if (value >= bound) {
    fail(file, line, "index " + std::string(token) + " out of range [0," + std::to_string(bound) + ")");
  }
  return static_cast<std::size_t>(value);
}

std::vector<NodeId> read_split(const fs::path& file, std::size_t n) {
  const std::string text = read_file(file);
  std::vector<NodeId> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = split_spaces(lines[i]);
    if (tokens.empty()) continue;
    if (tokens.size() != 1) fail(file, i + 1, "expected one node index");
    const auto v = static_cast<NodeId>(parse_index(tokens[0], n, file, i + 1));
    if (!out.empty() && v <= out.back()) fail(file, i + 1, "indices must be strictly ascending");
    out.push_back(v);
  }
  return out;
}

SparseAdjacency read_edges(const fs::path& file, std::size_t n) {
  const std::string text = read_file(file);
  const auto lines = split_lines(text);
  std::vector<std::vector<NodeId>> rows(n);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = split_spaces(lines[i]);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) fail(file, i + 1, "expected 'u v'");
    auto u = static_cast<NodeId>(parse_index(tokens[0], n, file, i + 1));
    auto v = static_cast<NodeId>(parse_index(tokens[1], n, file, i + 1));
    if (u > v) std::swap(u, v);
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | v;
    if (!seen.insert(key).second) {
      fail(file, i + 1, "duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    }
    rows[u].push_back(v);
    if (u != v) rows[v].push_back(u);
  }
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<NodeId> cols;
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(rows[v].begin(), rows[v].end());
    cols.insert(cols.end(), rows[v].begin(), rows[v].end());
    row_ptr[v + 1] = cols.size();
  }
  return SparseAdjacency(n, std::move(row_ptr), std::move(cols));
}

Matrix read_features(const fs::path& file, std::size_t n, std::size_t f) {
  const std::string text = read_file(file);
  const auto lines = split_lines(text);
  if (lines.size() != n) {
    throw DataError(file.filename().string() + ": expected " + std::to_string(n) + " lines, found " +
                    std::to_string(lines.size()));
  }
  Matrix x(n, f);
  for (std::size_t v = 0; v < n; ++v) {
    long long last = -1;
    for (std::string_view tok : split_spaces(lines[v])) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos) fail(file, v + 1, "expected col:value, got '" + std::string(tok) + "'");
      const std::size_t col = parse_index(tok.substr(0, colon), f, file, v + 1);
      if (static_cast<long long>(col) <= last) fail(file, v + 1, "columns must be strictly increasing");
      last = static_cast<long long>(col);
      x(v, col) = parse_number<double>(tok.substr(colon + 1), file, v + 1);
    }
  }
  return x;
}

std::vector<std::int32_t> read_labels(const fs::path& file, std::size_t n) {
  const std::string text = read_file(file);
  const auto lines = split_lines(text);
  std::vector<std::int32_t> labels;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = split_spaces(lines[i]);
    if (tokens.size() != 1) fail(file, i + 1, "expected one class index");
    labels.push_back(parse_number<std::int32_t>(tokens[0], file, i + 1));
  }
  if (labels.size() != n) {
    throw DataError(file.filename().string() + ": expected " + std::to_string(n) + " labels, found " +
                    std::to_string(labels.size()));
  }
  return labels;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_split(const fs::path& path, const std::vector<NodeId>& nodes) {
  std::string text;
  for (NodeId v : nodes) text += std::to_string(v) + "\n";
  write_text(path, text);
}

void check_mask(const std::string& name, const std::vector<NodeId>& mask, std::size_t n,
                std::vector<std::string>& out) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] >= n) {
      out.push_back(name + " mask: node " + std::to_string(mask[i]) + " out of range");
      return;
    }
    if (i > 0 && mask[i] <= mask[i - 1]) {
      out.push_back(name + " mask: not strictly ascending at position " + std::to_string(i));
      return;
    }
  }
}

void check_overlap(const std::string& a_name, const std::vector<NodeId>& a,
                   const std::string& b_name, const std::vector<NodeId>& b,
                   std::vector<std::string>& out) {
  std::vector<NodeId> sa(a), sb(b), both;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
  if (!both.empty()) {
    out.push_back(a_name + " and " + b_name + " masks overlap on " + std::to_string(both.size()) +
                  " node(s), first " + std::to_string(both.front()));
  }
}

}  // namespace

GraphDataset load_dataset(const fs::path& dir, const LoadOptions& options) {
  const fs::path meta_path = dir / "meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("meta.json: " + std::string(e.what()));
  }
  GraphDataset data;
  std::size_t n = 0, f = 0;
  try {
    n = meta.at("num_nodes").get<std::size_t>();
    f = meta.at("num_features").get<std::size_t>();
    data.num_classes = meta.at("num_classes").get<std::size_t>();
    data.name = meta.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("meta.json: " + std::string(e.what()));
  }
  data.adjacency = read_edges(dir / "graph.edges", n);
  data.features = read_features(dir / "features.sparse", n, f);
  data.labels = read_labels(dir / "labels.txt", n);
  data.split.train = read_split(dir / "split.train", n);
  data.split.val = read_split(dir / "split.val", n);
  data.split.test = read_split(dir / "split.test", n);
  if (options.validate) {
    const auto violations = validate(data);
    if (!violations.empty()) {
      std::string msg = "dataset " + dir.string() + " is invalid:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw DataError(msg);
    }
  }
  return data;
}

void save_dataset(const GraphDataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["num_nodes"] = data.num_nodes();
  meta["num_features"] = data.num_features();
  meta["num_classes"] = data.num_classes;
  meta["name"] = data.name;
  write_text(dir / "meta.json", meta.dump(2) + "\n");

  std::string edges;
  for (const auto& [u, v] : data.adjacency.edges()) {
    edges += std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  for (std::size_t v = 0; v < data.adjacency.num_nodes(); ++v) {
    if (data.adjacency.contains(v, v)) edges += std::to_string(v) + " " + std::to_string(v) + "\n";
  }
  write_text(dir / "graph.edges", edges);

  std::string feats;
  for (std::size_t v = 0; v < data.features.rows(); ++v) {
    bool first = true;
    auto row = data.features.row(v);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0) continue;
      if (!first) feats += ' ';
      feats += std::to_string(j) + ":" + format_double(row[j]);
      first = false;
    }
    feats += '\n';
  }
  write_text(dir / "features.sparse", feats);

  std::string labels;
  for (std::int32_t y : data.labels) labels += std::to_string(y) + "\n";
  write_text(dir / "labels.txt", labels);

  write_split(dir / "split.train", data.split.train);
  write_split(dir / "split.val", data.split.val);
  write_split(dir / "split.test", data.split.test);
}

std::vector<std::string> validate(const GraphDataset& data) {
  std::vector<std::string> out;
  const std::size_t n = data.labels.size();
  if (data.num_classes == 0) out.push_back("num_classes must be positive");
  if (data.features.rows() != n) {
    out.push_back("features have " + std::to_string(data.features.rows()) + " rows for " +
                  std::to_string(n) + " nodes");
  }
  if (!data.features.all_finite()) out.push_back("features contain non-finite values");
  for (std::size_t v = 0; v < n; ++v) {
    if (data.labels[v] < 0 || static_cast<std::size_t>(data.labels[v]) >= data.num_classes) {
      out.push_back("label " + std::to_string(data.labels[v]) + " of node " + std::to_string(v) +
                    " outside [0," + std::to_string(data.num_classes) + ")");
      break;
    }
  }
  const SparseAdjacency& a = data.adjacency;
  if (a.num_nodes() != n) {
    out.push_back("adjacency has " + std::to_string(a.num_nodes()) + " nodes for " +
                  std::to_string(n) + " labels");
  } else {
    for (std::size_t v = 0; v < n; ++v) {
      if (a.contains(v, v)) {
        out.push_back("self-loop on node " + std::to_string(v));
        break;
      }
    }
    if (!a.is_structurally_symmetric()) out.push_back("adjacency is not symmetric");
    if (a.weighted()) out.push_back("adjacency must be binary");
  }
  check_mask("train", data.split.train, n, out);
  check_mask("val", data.split.val, n, out);
  check_mask("test", data.split.test, n, out);
  check_overlap("train", data.split.train, "val", data.split.val, out);
  check_overlap("train", data.split.train, "test", data.split.test, out);
  check_overlap("val", data.split.val, "test", data.split.test, out);
  return out;
}

DatasetStats stats(const GraphDataset& data) {
  DatasetStats s;
  s.num_nodes = data.num_nodes();
  s.nnz = data.adjacency.nnz();
  s.num_features = data.num_features();
  s.num_classes = data.num_classes;
  s.train = data.split.train.size();
  s.val = data.split.val.size();
  s.test = data.split.test.size();
  for (std::size_t v = 0; v < data.adjacency.num_nodes(); ++v) {
    const std::size_t d = data.adjacency.row_length(v);
    if (d >= s.degree_histogram.size()) s.degree_histogram.resize(d + 1, 0);
    ++s.degree_histogram[d];
    if (d == 0) ++s.isolated;
  }
  return s;
}

void row_normalize(Matrix& features) {
  for (std::size_t v = 0; v < features.rows(); ++v) {
    auto row = features.row(v);
    double total = 0.0;
    for (double e : row) total += e;
    if (total == 0.0) continue;
    for (double& e : row) e /= total;
  }
}

}  // namespace bgnn
