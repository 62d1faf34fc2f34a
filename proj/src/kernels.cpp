#include "fasthand/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace fasthand {

namespace {

using RowMajorMatrix = Tensor::Matrix;
using ConstMatrixMap = Tensor::ConstMap;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXf>;

void check_conv_input(const Tensor& input, const ConvWeights& w, const char* op) {
  FH_REQUIRE(!input.empty(), std::string(op) + ": input tensor is empty");
  w.validate();
  FH_REQUIRE(w.in_channels == input.channels(),
             std::string(op) + ": weight expects " + std::to_string(w.in_channels) +
                 " input channels, tensor has " + std::to_string(input.channels()));
}

// Gathers zero-padded receptive fields, one row per output pixel, columns in
// (ky, kx, ci) order to match the ConvWeights layout.
RowMajorMatrix im2col(const Tensor& input, int kernel_h, int kernel_w, int stride, int pad_y,
                      int pad_x, int out_h, int out_w) {
  const int channels = input.channels();
  const int patch = kernel_h * kernel_w * channels;
  RowMajorMatrix patches = RowMajorMatrix::Zero(static_cast<Eigen::Index>(out_h) * out_w, patch);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      float* row = patches.data() + (static_cast<std::size_t>(oy) * out_w + ox) * patch;
      for (int ky = 0; ky < kernel_h; ++ky) {
        const int iy = oy * stride - pad_y + ky;
        if (iy < 0 || iy >= input.height()) continue;
        for (int kx = 0; kx < kernel_w; ++kx) {
          const int ix = ox * stride - pad_x + kx;
          if (ix < 0 || ix >= input.width()) continue;
          std::copy_n(&input.at(iy, ix, 0), channels, row + (ky * kernel_w + kx) * channels);
        }
      }
    }
  }
  return patches;
}

}  // namespace

int conv_output_size(int input, int kernel, int stride, Padding padding) {
  FH_REQUIRE(input > 0 && kernel > 0 && stride > 0, "conv geometry: sizes must be positive");
  if (padding == Padding::kSame) return (input + stride - 1) / stride;
  FH_REQUIRE(input >= kernel, "conv geometry: valid padding needs input >= kernel, got input " +
                                  std::to_string(input) + " kernel " + std::to_string(kernel));
  return (input - kernel) / stride + 1;
}

int conv_pad_before(int input, int kernel, int stride, Padding padding) {
  if (padding == Padding::kValid) return 0;
  const int out = conv_output_size(input, kernel, stride, padding);
  const int total = std::max((out - 1) * stride + kernel - input, 0);
  return total / 2;
}

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, Padding padding) {
  check_conv_input(input, w, "conv2d");
  FH_REQUIRE(!w.depthwise, "conv2d: dense weights required, got depthwise");
  FH_REQUIRE(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2");

  const int out_h = conv_output_size(input.height(), w.kernel_h, stride, padding);
  const int out_w = conv_output_size(input.width(), w.kernel_w, stride, padding);
  const int pad_y = conv_pad_before(input.height(), w.kernel_h, stride, padding);
  const int pad_x = conv_pad_before(input.width(), w.kernel_w, stride, padding);

  const RowMajorMatrix patches =
      im2col(input, w.kernel_h, w.kernel_w, stride, pad_y, pad_x, out_h, out_w);
  ConstMatrixMap weights(w.values.data(),
                         static_cast<Eigen::Index>(w.kernel_h) * w.kernel_w * w.in_channels,
                         w.out_channels);
  ConstVectorMap bias(w.bias.data(), w.out_channels);

  Tensor output(out_h, out_w, w.out_channels);
  output.as_matrix().noalias() = patches * weights;
  output.as_matrix().rowwise() += bias.transpose();
  return output;
}

Tensor depthwise_conv2d(const Tensor& input, const ConvWeights& w, int stride, Padding padding) {
  check_conv_input(input, w, "depthwise_conv2d");
  FH_REQUIRE(w.depthwise, "depthwise_conv2d: depthwise weights required");
  FH_REQUIRE(stride == 1 || stride == 2, "depthwise_conv2d: stride must be 1 or 2");

  const int channels = input.channels();
  const int out_h = conv_output_size(input.height(), w.kernel_h, stride, padding);
  const int out_w = conv_output_size(input.width(), w.kernel_w, stride, padding);
  const int pad_y = conv_pad_before(input.height(), w.kernel_h, stride, padding);
  const int pad_x = conv_pad_before(input.width(), w.kernel_w, stride, padding);

  Tensor output(out_h, out_w, channels);
  ConstVectorMap bias(w.bias.data(), channels);
  Eigen::VectorXf acc(channels);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      acc = bias;
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        const int iy = oy * stride - pad_y + ky;
        if (iy < 0 || iy >= input.height()) continue;
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int ix = ox * stride - pad_x + kx;
          if (ix < 0 || ix >= input.width()) continue;
          ConstVectorMap tap(&w.values[(static_cast<std::size_t>(ky) * w.kernel_w + kx) * channels],
                             channels);
          acc.array() += tap.array() * input.pixel(iy, ix).array();
        }
      }
      output.pixel(oy, ox) = acc;
    }
  }
  return output;
}

Tensor pointwise_conv(const Tensor& input, const ConvWeights& w) {
  check_conv_input(input, w, "pointwise_conv");
  FH_REQUIRE(!w.depthwise, "pointwise_conv: dense weights required");
  FH_REQUIRE(w.kernel_h == 1 && w.kernel_w == 1,
             "pointwise_conv: kernel must be 1x1, got " + std::to_string(w.kernel_h) + "x" +
                 std::to_string(w.kernel_w));

  ConstMatrixMap weights(w.values.data(), w.in_channels, w.out_channels);
  ConstVectorMap bias(w.bias.data(), w.out_channels);
  Tensor output(input.height(), input.width(), w.out_channels);
  output.as_matrix().noalias() = input.as_matrix() * weights;
  output.as_matrix().rowwise() += bias.transpose();
  return output;
}

Tensor depthwise_separable_conv(const Tensor& input, const ConvWeights& dw, const ConvWeights& pw,
                                int stride, Padding padding) {
  FH_REQUIRE(pw.in_channels == dw.in_channels,
             "depthwise_separable_conv: pointwise expects " + std::to_string(pw.in_channels) +
                 " channels, depthwise produces " + std::to_string(dw.in_channels));
  return pointwise_conv(depthwise_conv2d(input, dw, stride, padding), pw);
}

Tensor transposed_conv2d(const Tensor& input, const ConvWeights& w, int stride) {
  check_conv_input(input, w, "transposed_conv2d");
  FH_REQUIRE(!w.depthwise, "transposed_conv2d: dense weights required");
  FH_REQUIRE(stride >= 1, "transposed_conv2d: stride must be positive");
  FH_REQUIRE(w.kernel_h == w.kernel_w, "transposed_conv2d: kernel must be square");
  const int excess = w.kernel_h - stride;
  FH_REQUIRE(excess >= 0 && excess % 2 == 0,
             "transposed_conv2d: kernel " + std::to_string(w.kernel_h) + " with stride " +
                 std::to_string(stride) + " cannot produce an exact x" + std::to_string(stride) +
                 " upsample");
  const int pad = excess / 2;

  const int out_h = input.height() * stride;
  const int out_w = input.width() * stride;
  const int cin = w.in_channels;
  const int cout = w.out_channels;

  Tensor output(out_h, out_w, cout);
  ConstVectorMap bias(w.bias.data(), cout);
  output.as_matrix().rowwise() = bias.transpose();

  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      const float* in_px = &input.at(y, x, 0);
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        const int oy = y * stride + ky - pad;
        if (oy < 0 || oy >= out_h) continue;
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int ox = x * stride + kx - pad;
          if (ox < 0 || ox >= out_w) continue;
          auto out_px = output.pixel(oy, ox);
          for (int ci = 0; ci < cin; ++ci) {
            ConstVectorMap tap(
                &w.values[((static_cast<std::size_t>(ky) * w.kernel_w + kx) * cin + ci) * cout],
                cout);
            out_px += in_px[ci] * tap;
          }
        }
      }
    }
  }
  return output;
}

Tensor resize_bilinear(const Tensor& input, int out_height, int out_width) {
  FH_REQUIRE(!input.empty(), "resize_bilinear: input tensor is empty");
  FH_REQUIRE(out_height >= 1 && out_width >= 1, "resize_bilinear: output size must be positive");

  const int in_h = input.height();
  const int in_w = input.width();
  Tensor output(out_height, out_width, input.channels());

  const double scale_y = static_cast<double>(in_h) / out_height;
  const double scale_x = static_cast<double>(in_w) / out_width;

  for (int oy = 0; oy < out_height; ++oy) {
    const double sy = (oy + 0.5) * scale_y - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, in_h - 1);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const float fy = static_cast<float>(std::clamp(sy - y0, 0.0, 1.0));
    for (int ox = 0; ox < out_width; ++ox) {
      const double sx = (ox + 0.5) * scale_x - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, in_w - 1);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const float fx = static_cast<float>(std::clamp(sx - x0, 0.0, 1.0));

      auto out_px = output.pixel(oy, ox);
      // Lerp form keeps constants exact and identity resizes bitwise equal.
      Eigen::VectorXf top =
          input.pixel(y0, x0) + fx * (input.pixel(y0, x1) - input.pixel(y0, x0));
      Eigen::VectorXf bottom =
          input.pixel(y1, x0) + fx * (input.pixel(y1, x1) - input.pixel(y1, x0));
      out_px = top + fy * (bottom - top);
    }
  }
  return output;
}

Tensor relu(const Tensor& input) {
  FH_REQUIRE(!input.empty(), "relu: input tensor is empty");
  Tensor output(input.height(), input.width(), input.channels());
  output.as_matrix() = input.as_matrix().cwiseMax(0.0f);
  return output;
}

Tensor add(const Tensor& a, const Tensor& b) {
  FH_REQUIRE(!a.empty() && !b.empty(), "add: input tensor is empty");
  FH_REQUIRE(a.same_shape(b),
             "add: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  Tensor output(a.height(), a.width(), a.channels());
  output.as_matrix() = a.as_matrix() + b.as_matrix();
  return output;
}

}  // namespace fasthand
