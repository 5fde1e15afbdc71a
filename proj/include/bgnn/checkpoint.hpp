#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "bgnn/dataset.hpp"
#include "bgnn/model.hpp"

namespace bgnn {

struct CheckpointMeta {
  std::string dataset;
  std::size_t num_nodes = 0;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  ModelConfig config;
  CheckpointMeta meta;
  ModelState state;
};

CheckpointMeta describe(const GraphDataset& data);

// Layout, all integers little-endian:
//   "BGNNCKPT"  u32 version  u64 n  n bytes of JSON {"config", "meta"}
//   u64 tensor count, then per tensor:
//     u64 name length, name, u8 decay, u64 rows, u64 cols, rows*cols f64
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
// Throws DataError on a malformed file or if the tensors do not match the
// shapes implied by the stored config and meta.
Checkpoint load_checkpoint(const std::filesystem::path& file);

// Throws DataError if the checkpoint was trained on a dataset of another
// shape or name.
void check_compatible(const Checkpoint& ckpt, const GraphDataset& data);

}  // namespace bgnn
