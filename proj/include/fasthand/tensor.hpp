#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fasthand/errors.hpp"

namespace fasthand {

// Dense rank-3 array, row-major with channels innermost:
// data[(y * width + x) * channels + c]. Viewed through as_matrix() it is a
// (height*width) x channels matrix with one row per pixel, which is the
// layout the GEMM-backed kernels rely on.
template <typename Scalar>
class TensorT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Matrix>;
  using ConstMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;
  using ConstVectorMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

  TensorT() = default;

  TensorT(int height, int width, int channels)
      : height_(height), width_(width), channels_(channels) {
    FH_REQUIRE(height > 0 && width > 0 && channels > 0,
               "tensor dimensions must be positive, got " + std::to_string(height) + "x" +
                   std::to_string(width) + "x" + std::to_string(channels));
    data_.assign(static_cast<std::size_t>(height) * width * channels, Scalar(0));
  }

  static TensorT constant(int height, int width, int channels, Scalar value) {
    TensorT t(height, width, channels);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Scalar& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  const Scalar& at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Map as_matrix() {
    return Map(data_.data(), static_cast<Eigen::Index>(height_) * width_, channels_);
  }
  ConstMap as_matrix() const {
    return ConstMap(data_.data(), static_cast<Eigen::Index>(height_) * width_, channels_);
  }

  // Channel vector at one pixel.
  VectorMap pixel(int y, int x) { return VectorMap(&data_[index(y, x, 0)], channels_); }
  ConstVectorMap pixel(int y, int x) const {
    return ConstVectorMap(&data_[index(y, x, 0)], channels_);
  }

  bool same_shape(const TensorT& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  std::string shape_string() const {
    return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
           std::to_string(channels_);
  }

  bool all_finite() const {
    for (Scalar v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const TensorT& a, const TensorT& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<Scalar> data_;
};

using Tensor = TensorT<float>;

// Convolution parameters. Dense kernels are laid out (ky, kx, in, out) with
// out innermost; the depthwise variant drops the out axis and filters each
// channel independently (out_channels == in_channels).
struct ConvWeights {
  int kernel_h = 0;
  int kernel_w = 0;
  int in_channels = 0;
  int out_channels = 0;
  bool depthwise = false;
  std::vector<float> values;
  std::vector<float> bias;

  static ConvWeights dense(int kernel_h, int kernel_w, int in_channels, int out_channels);
  static ConvWeights depthwise_kernel(int kernel_h, int kernel_w, int channels);

  std::size_t param_count() const { return values.size() + bias.size(); }

  float& at(int ky, int kx, int ci, int co) {
    return values[((static_cast<std::size_t>(ky) * kernel_w + kx) * in_channels + ci) *
                      out_channels + co];
  }
  float at(int ky, int kx, int ci, int co) const {
    return values[((static_cast<std::size_t>(ky) * kernel_w + kx) * in_channels + ci) *
                      out_channels + co];
  }
  float& at_dw(int ky, int kx, int c) {
    return values[(static_cast<std::size_t>(ky) * kernel_w + kx) * in_channels + c];
  }
  float at_dw(int ky, int kx, int c) const {
    return values[(static_cast<std::size_t>(ky) * kernel_w + kx) * in_channels + c];
  }

  void validate() const;
};

}  // namespace fasthand
