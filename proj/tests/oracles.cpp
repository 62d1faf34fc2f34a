#include "oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace fasthand::oracle {

namespace {

int out_size_ref(int in, int k, int stride, Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  return (in - k) / stride + 1;
}

int pad_before_ref(int in, int k, int stride, Padding padding) {
  if (padding == Padding::kValid) return 0;
  const int out = out_size_ref(in, k, stride, padding);
  int total = (out - 1) * stride + k - in;
  if (total < 0) total = 0;
  return total / 2;
}

}  // namespace

Tensor conv2d_ref(const Tensor& input, const ConvWeights& w, int stride, Padding padding) {
  const int out_h = out_size_ref(input.height(), w.kernel_h, stride, padding);
  const int out_w = out_size_ref(input.width(), w.kernel_w, stride, padding);
  const int pad_y = pad_before_ref(input.height(), w.kernel_h, stride, padding);
  const int pad_x = pad_before_ref(input.width(), w.kernel_w, stride, padding);

  Tensor out(out_h, out_w, w.out_channels);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int co = 0; co < w.out_channels; ++co) {
        double acc = w.bias[co];
        for (int ky = 0; ky < w.kernel_h; ++ky) {
          for (int kx = 0; kx < w.kernel_w; ++kx) {
            const int iy = oy * stride - pad_y + ky;
            const int ix = ox * stride - pad_x + kx;
            if (iy < 0 || iy >= input.height() || ix < 0 || ix >= input.width()) continue;
            for (int ci = 0; ci < w.in_channels; ++ci) {
              acc += static_cast<double>(input.at(iy, ix, ci)) * w.at(ky, kx, ci, co);
            }
          }
        }
        out.at(oy, ox, co) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor depthwise_conv2d_ref(const Tensor& input, const ConvWeights& w, int stride,
                            Padding padding) {
  const int out_h = out_size_ref(input.height(), w.kernel_h, stride, padding);
  const int out_w = out_size_ref(input.width(), w.kernel_w, stride, padding);
  const int pad_y = pad_before_ref(input.height(), w.kernel_h, stride, padding);
  const int pad_x = pad_before_ref(input.width(), w.kernel_w, stride, padding);

  Tensor out(out_h, out_w, input.channels());
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int c = 0; c < input.channels(); ++c) {
        double acc = w.bias[c];
        for (int ky = 0; ky < w.kernel_h; ++ky) {
          for (int kx = 0; kx < w.kernel_w; ++kx) {
            const int iy = oy * stride - pad_y + ky;
            const int ix = ox * stride - pad_x + kx;
            if (iy < 0 || iy >= input.height() || ix < 0 || ix >= input.width()) continue;
            acc += static_cast<double>(input.at(iy, ix, c)) * w.at_dw(ky, kx, c);
          }
        }
        out.at(oy, ox, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor pointwise_conv_ref(const Tensor& input, const ConvWeights& w) {
  Tensor out(input.height(), input.width(), w.out_channels);
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      for (int co = 0; co < w.out_channels; ++co) {
        double acc = w.bias[co];
        for (int ci = 0; ci < w.in_channels; ++ci) {
          acc += static_cast<double>(input.at(y, x, ci)) * w.at(0, 0, ci, co);
        }
        out.at(y, x, co) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor transposed_conv2d_ref(const Tensor& input, const ConvWeights& w, int stride) {
  const int pad = (w.kernel_h - stride) / 2;
  const int out_h = input.height() * stride;
  const int out_w = input.width() * stride;

  std::vector<double> acc(static_cast<std::size_t>(out_h) * out_w * w.out_channels, 0.0);
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      for (int ky = 0; ky < w.kernel_h; ++ky) {
        for (int kx = 0; kx < w.kernel_w; ++kx) {
          const int oy = y * stride + ky - pad;
          const int ox = x * stride + kx - pad;
          if (oy < 0 || oy >= out_h || ox < 0 || ox >= out_w) continue;
          for (int ci = 0; ci < w.in_channels; ++ci) {
            for (int co = 0; co < w.out_channels; ++co) {
              acc[(static_cast<std::size_t>(oy) * out_w + ox) * w.out_channels + co] +=
                  static_cast<double>(input.at(y, x, ci)) * w.at(ky, kx, ci, co);
            }
          }
        }
      }
    }
  }

  Tensor out(out_h, out_w, w.out_channels);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int co = 0; co < w.out_channels; ++co) {
        out.at(oy, ox, co) = static_cast<float>(
            acc[(static_cast<std::size_t>(oy) * out_w + ox) * w.out_channels + co] + w.bias[co]);
      }
    }
  }
  return out;
}

Tensor resize_bilinear_ref(const Tensor& input, int out_height, int out_width) {
  Tensor out(out_height, out_width, input.channels());
  auto sample = [&](int y, int x, int c) {
    y = y < 0 ? 0 : (y >= input.height() ? input.height() - 1 : y);
    x = x < 0 ? 0 : (x >= input.width() ? input.width() - 1 : x);
    return static_cast<double>(input.at(y, x, c));
  };
  for (int oy = 0; oy < out_height; ++oy) {
    const double sy = (oy + 0.5) * input.height() / out_height - 0.5;
    const double y0 = std::floor(sy);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_width; ++ox) {
      const double sx = (ox + 0.5) * input.width() / out_width - 0.5;
      const double x0 = std::floor(sx);
      const double fx = sx - x0;
      for (int c = 0; c < input.channels(); ++c) {
        const double v = (1.0 - fy) * (1.0 - fx) * sample(static_cast<int>(y0), static_cast<int>(x0), c) +
                         (1.0 - fy) * fx * sample(static_cast<int>(y0), static_cast<int>(x0) + 1, c) +
                         fy * (1.0 - fx) * sample(static_cast<int>(y0) + 1, static_cast<int>(x0), c) +
                         fy * fx * sample(static_cast<int>(y0) + 1, static_cast<int>(x0) + 1, c);
        out.at(oy, ox, c) = static_cast<float>(v);
      }
    }
  }
  return out;
}

ConvWeights expand_separable(const ConvWeights& dw, const ConvWeights& pw) {
  ConvWeights dense = ConvWeights::dense(dw.kernel_h, dw.kernel_w, dw.in_channels,
                                         pw.out_channels);
  for (int ky = 0; ky < dw.kernel_h; ++ky) {
    for (int kx = 0; kx < dw.kernel_w; ++kx) {
      for (int ci = 0; ci < dw.in_channels; ++ci) {
        for (int co = 0; co < pw.out_channels; ++co) {
          dense.at(ky, kx, ci, co) = dw.at_dw(ky, kx, ci) * pw.at(0, 0, ci, co);
        }
      }
    }
  }
  // The pointwise conv also mixes the depthwise biases into every output.
  for (int co = 0; co < pw.out_channels; ++co) {
    double b = pw.bias[co];
    for (int ci = 0; ci < dw.in_channels; ++ci) {
      b += static_cast<double>(dw.bias[ci]) * pw.at(0, 0, ci, co);
    }
    dense.bias[co] = static_cast<float>(b);
  }
  return dense;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return std::numeric_limits<float>::infinity();
  float worst = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

double sse_ref(const std::vector<MetricSample>& samples) {
  double total = 0.0;
  for (const MetricSample& s : samples) {
    const double norm = s.width > s.height ? s.width : s.height;
    double per_sample = 0.0;
    for (int i = 0; i < 21; ++i) {
      if (!s.visible[i]) continue;
      const double dx = (s.truth[2 * i] - s.pred[2 * i]) / norm;
      const double dy = (s.truth[2 * i + 1] - s.pred[2 * i + 1]) / norm;
      per_sample += dx * dx + dy * dy;
    }
    total += per_sample;
  }
  return total / static_cast<double>(samples.size());
}

double epe_ref(const std::vector<MetricSample>& samples) {
  double total = 0.0;
  std::size_t terms = 0;
  for (const MetricSample& s : samples) {
    if (!s.visible[0]) continue;  // root-relative error needs the root
    const double norm = s.width > s.height ? s.width : s.height;
    const double rtx = s.truth[0] - s.pred[0];
    const double rty = s.truth[1] - s.pred[1];
    for (int i = 0; i < 21; ++i) {
      if (!s.visible[i]) continue;
      const double dx = (s.truth[2 * i] - s.pred[2 * i]) - rtx;
      const double dy = (s.truth[2 * i + 1] - s.pred[2 * i + 1]) - rty;
      total += std::sqrt(dx * dx + dy * dy) / norm;
      ++terms;
    }
  }
  return total / static_cast<double>(terms);
}

std::array<double, 21> pck_per_joint_ref(const std::vector<MetricSample>& samples, double sigma) {
  std::array<double, 21> pck{};
  for (int i = 0; i < 21; ++i) {
    std::size_t correct = 0;
    std::size_t seen = 0;
    for (const MetricSample& s : samples) {
      if (!s.visible[i]) continue;
      const double norm = s.width > s.height ? s.width : s.height;
      const double dx = s.truth[2 * i] - s.pred[2 * i];
      const double dy = s.truth[2 * i + 1] - s.pred[2 * i + 1];
      ++seen;
      if (std::sqrt(dx * dx + dy * dy) / norm <= sigma) ++correct;
    }
    pck[i] = seen == 0 ? -1.0 : static_cast<double>(correct) / static_cast<double>(seen);
  }
  return pck;
}

double pck_overall_ref(const std::vector<MetricSample>& samples, double sigma) {
  const auto per_joint = pck_per_joint_ref(samples, sigma);
  double total = 0.0;
  int joints = 0;
  for (double v : per_joint) {
    if (v < 0.0) continue;
    total += v;
    ++joints;
  }
  return total / joints;
}

}  // namespace fasthand::oracle
