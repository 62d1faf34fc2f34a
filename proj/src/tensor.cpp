#include "fasthand/tensor.hpp"

namespace fasthand {

ConvWeights ConvWeights::dense(int kernel_h, int kernel_w, int in_channels, int out_channels) {
  FH_REQUIRE(kernel_h > 0 && kernel_w > 0 && in_channels > 0 && out_channels > 0,
             "conv weights: dimensions must be positive");
  ConvWeights w;
  w.kernel_h = kernel_h;
  w.kernel_w = kernel_w;
  w.in_channels = in_channels;
  w.out_channels = out_channels;
  w.values.assign(static_cast<std::size_t>(kernel_h) * kernel_w * in_channels * out_channels,
                  0.0f);
  w.bias.assign(out_channels, 0.0f);
  return w;
}

ConvWeights ConvWeights::depthwise_kernel(int kernel_h, int kernel_w, int channels) {
  FH_REQUIRE(kernel_h > 0 && kernel_w > 0 && channels > 0,
             "conv weights: dimensions must be positive");
  ConvWeights w;
  w.kernel_h = kernel_h;
  w.kernel_w = kernel_w;
  w.in_channels = channels;
  w.out_channels = channels;
  w.depthwise = true;
  w.values.assign(static_cast<std::size_t>(kernel_h) * kernel_w * channels, 0.0f);
  w.bias.assign(channels, 0.0f);
  return w;
}

void ConvWeights::validate() const {
  FH_REQUIRE(kernel_h > 0 && kernel_w > 0 && in_channels > 0 && out_channels > 0,
             "conv weights: dimensions must be positive");
  const std::size_t expected =
      depthwise ? static_cast<std::size_t>(kernel_h) * kernel_w * in_channels
                : static_cast<std::size_t>(kernel_h) * kernel_w * in_channels * out_channels;
  FH_REQUIRE(values.size() == expected,
             "conv weights: value count " + std::to_string(values.size()) + " does not match " +
                 std::to_string(expected));
  FH_REQUIRE(!depthwise || in_channels == out_channels,
             "conv weights: depthwise kernels require out_channels == in_channels");
  FH_REQUIRE(bias.size() == static_cast<std::size_t>(out_channels),
             "conv weights: bias count " + std::to_string(bias.size()) + " does not match " +
                 std::to_string(out_channels) + " output channels");
}

}  // namespace fasthand
