#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fasthand/model.hpp"

namespace fasthand {

// Binary weight container. Layout, little-endian, no padding:
//   magic "FSTH" | u32 version = 1 | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 rank | u32 dims[rank] | f32 values
// Dense kernels are rank 4 (kh, kw, in, out), depthwise kernels rank 3
// (kh, kw, c), biases rank 1.
struct StoredTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

using WeightStore = std::map<std::string, StoredTensor>;

void save_weights(const Model& model, const std::filesystem::path& path);

WeightStore load_weights(const std::filesystem::path& path);

// Rebuilds the block schedule from the tensor names and shapes in a store, so
// weight files are self-describing.
ModelConfig infer_config(const WeightStore& store);

// Binds stored tensors onto a freshly built schedule; every parameter must be
// present with matching dimensions.
Model build_fasthand(const ModelConfig& config, const WeightStore& store);

// Convenience: load + infer_config + bind.
Model load_model(const std::filesystem::path& path);

}  // namespace fasthand
