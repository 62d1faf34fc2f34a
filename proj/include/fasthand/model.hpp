#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fasthand/landmarks.hpp"
#include "fasthand/tensor.hpp"

namespace fasthand {

inline constexpr int kInputSize = 256;
inline constexpr int kEncoderOutputSize = 8;
inline constexpr int kHeatmapSize = 64;

// Block schedule for the encoder-decoder. The spatial contract is fixed —
// a stride-2 stem, one Low downsample, a Middle hourglass that returns to its
// entry resolution, three High downsamples to 8x8, and three deconvolutions
// back to 64x64 — while widths and residual repeats are configurable.
struct ModelConfig {
  int stem_channels = 32;
  int low_out_channels = 64;
  int middle_channels = 64;
  int middle_depth = 2;                          // hourglass down/up pairs
  std::vector<int> high_channels = {96, 192, 192};
  std::vector<int> decoder_channels = {96, 48, 48};
  int output_channels = kNumLandmarks;
  int residual_repeats = 4;

  void validate() const;

  static ModelConfig preset(const std::string& name);  // "default", "small", "slim"
  static std::vector<std::string> preset_names();
};

// 3x3 depthwise filter followed by a 1x1 channel mix.
struct SeparableConvWeights {
  ConvWeights dw;
  ConvWeights pw;
};

struct ResidualBlockWeights {
  SeparableConvWeights c1;
  SeparableConvWeights c2;
  std::optional<ConvWeights> projection;  // 1x1 shortcut when channels change
};

// Residual blocks at the input width, then a stride-2 separable reduction.
struct DownBlockWeights {
  std::vector<ResidualBlockWeights> residuals;
  SeparableConvWeights reduce;
};

// Residual blocks, a separable conv, a x2 resize, then the skip is added.
struct UpBlockWeights {
  std::vector<ResidualBlockWeights> residuals;
  SeparableConvWeights conv;
};

struct Model {
  ModelConfig config;
  ConvWeights stem;                          // 3x3 stride-2, 3 -> stem_channels
  DownBlockWeights low;
  std::vector<DownBlockWeights> middle_down;
  std::vector<UpBlockWeights> middle_up;
  std::vector<DownBlockWeights> high;
  std::vector<ConvWeights> deconvs;          // exactly 3, 4x4 stride-2
  ConvWeights head;                          // 1x1 -> output_channels
};

Tensor residual_block(const Tensor& input, const ResidualBlockWeights& w);
Tensor downsample_block(const Tensor& input, const DownBlockWeights& w);
Tensor upsample_block(const Tensor& input, const Tensor& skip, const UpBlockWeights& w);

// Deterministic fan-in-scaled uniform initialization; biases start at zero.
Model build_fasthand(const ModelConfig& config, std::uint32_t seed);

std::size_t param_count(const Model& model);

struct ForwardTrace {
  Tensor encoder_output;  // 8x8 feature map entering the decoder
};

Tensor forward(const Model& model, const Tensor& input, ForwardTrace* trace = nullptr);

// Applies fn(name, weights) over every parameter tensor in a fixed order; the
// order defines the serialized layout and is shared by init and binding.
void visit_parameters(Model& model, const std::function<void(const std::string&, ConvWeights&)>& fn);
void visit_parameters(const Model& model,
                      const std::function<void(const std::string&, const ConvWeights&)>& fn);

}  // namespace fasthand
