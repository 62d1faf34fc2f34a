#pragma once

#include "fasthand/tensor.hpp"

namespace fasthand {

enum class Padding { kSame, kValid };

// Output extent of a strided convolution: ceil(in/stride) for same padding,
// floor((in - k)/stride) + 1 for valid.
int conv_output_size(int input, int kernel, int stride, Padding padding);

// Leading pad for same padding. The total pad splits with the extra pixel on
// the bottom/right side.
int conv_pad_before(int input, int kernel, int stride, Padding padding);

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, Padding padding);

Tensor depthwise_conv2d(const Tensor& input, const ConvWeights& w, int stride, Padding padding);

Tensor pointwise_conv(const Tensor& input, const ConvWeights& w);

Tensor depthwise_separable_conv(const Tensor& input, const ConvWeights& dw, const ConvWeights& pw,
                                int stride, Padding padding = Padding::kSame);

// Scatter-accumulate deconvolution. Padding is (kernel - stride) / 2 so the
// output extent is exactly input * stride; kernel size and stride must leave
// (kernel - stride) even and non-negative.
Tensor transposed_conv2d(const Tensor& input, const ConvWeights& w, int stride);

// Half-pixel-center sampling with edge clamping; a constant tensor maps to a
// constant tensor of the same value, and resizing to the identical size
// reproduces the input bit for bit.
Tensor resize_bilinear(const Tensor& input, int out_height, int out_width);

Tensor relu(const Tensor& input);

Tensor add(const Tensor& a, const Tensor& b);

}  // namespace fasthand
