#include "fasthand/model.hpp"

#include <cmath>
#include <random>

#include "fasthand/kernels.hpp"

namespace fasthand {

namespace {

constexpr int kDeconvStages = 3;

SeparableConvWeights make_separable(int in_channels, int out_channels) {
  return {ConvWeights::depthwise_kernel(3, 3, in_channels),
          ConvWeights::dense(1, 1, in_channels, out_channels)};
}

ResidualBlockWeights make_residual(int in_channels, int out_channels) {
  ResidualBlockWeights block;
  block.c1 = make_separable(in_channels, out_channels);
  block.c2 = make_separable(out_channels, out_channels);
  if (in_channels != out_channels) {
    block.projection = ConvWeights::dense(1, 1, in_channels, out_channels);
  }
  return block;
}

DownBlockWeights make_down(int in_channels, int out_channels, int repeats) {
  DownBlockWeights block;
  for (int i = 0; i < repeats; ++i) block.residuals.push_back(make_residual(in_channels, in_channels));
  block.reduce = make_separable(in_channels, out_channels);
  return block;
}

UpBlockWeights make_up(int channels, int repeats) {
  UpBlockWeights block;
  for (int i = 0; i < repeats; ++i) block.residuals.push_back(make_residual(channels, channels));
  block.conv = make_separable(channels, channels);
  return block;
}

int fan_in(const ConvWeights& w) {
  return w.depthwise ? w.kernel_h * w.kernel_w : w.kernel_h * w.kernel_w * w.in_channels;
}

template <typename ModelT, typename Fn>
void visit_separable(const std::string& prefix, ModelT& s, Fn& fn) {
  fn(prefix + ".dw", s.dw);
  fn(prefix + ".pw", s.pw);
}

template <typename BlockT, typename Fn>
void visit_residual(const std::string& prefix, BlockT& block, Fn& fn) {
  visit_separable(prefix + ".c1", block.c1, fn);
  visit_separable(prefix + ".c2", block.c2, fn);
  if (block.projection) fn(prefix + ".proj", *block.projection);
}

template <typename BlockT, typename Fn>
void visit_down(const std::string& prefix, BlockT& block, Fn& fn) {
  for (std::size_t i = 0; i < block.residuals.size(); ++i) {
    visit_residual(prefix + ".res" + std::to_string(i), block.residuals[i], fn);
  }
  visit_separable(prefix + ".reduce", block.reduce, fn);
}

template <typename BlockT, typename Fn>
void visit_up(const std::string& prefix, BlockT& block, Fn& fn) {
  for (std::size_t i = 0; i < block.residuals.size(); ++i) {
    visit_residual(prefix + ".res" + std::to_string(i), block.residuals[i], fn);
  }
  visit_separable(prefix + ".conv", block.conv, fn);
}

template <typename ModelT, typename Fn>
void visit_impl(ModelT& model, Fn&& fn) {
  fn("stem", model.stem);
  visit_down("low", model.low, fn);
  for (std::size_t i = 0; i < model.middle_down.size(); ++i) {
    visit_down("mid.down" + std::to_string(i), model.middle_down[i], fn);
  }
  for (std::size_t i = 0; i < model.middle_up.size(); ++i) {
    visit_up("mid.up" + std::to_string(i), model.middle_up[i], fn);
  }
  for (std::size_t i = 0; i < model.high.size(); ++i) {
    visit_down("high" + std::to_string(i), model.high[i], fn);
  }
  for (std::size_t i = 0; i < model.deconvs.size(); ++i) {
    fn("deconv" + std::to_string(i), model.deconvs[i]);
  }
  fn("head", model.head);
}

}  // namespace

void ModelConfig::validate() const {
  FH_REQUIRE(stem_channels > 0 && low_out_channels > 0 && middle_channels > 0 &&
                 residual_repeats >= 1,
             "model config: channel counts and residual repeats must be positive");
  FH_REQUIRE(output_channels == kNumLandmarks,
             "model config: output channels fixed at " + std::to_string(kNumLandmarks));
  FH_REQUIRE(middle_channels == low_out_channels,
             "model config: Middle width must match the Low output width");
  for (int c : high_channels)
    FH_REQUIRE(c > 0, "model config: High channel counts must be positive");
  for (int c : decoder_channels)
    FH_REQUIRE(c > 0, "model config: decoder channel counts must be positive");
  FH_REQUIRE(decoder_channels.size() == kDeconvStages,
             "model config: decoder must have exactly 3 transposed-conv stages, got " +
                 std::to_string(decoder_channels.size()));

  // 256 input: stem and Low halve twice to 64; the High chain must end at 8.
  const int middle_size = kInputSize / 4;
  int encoder = middle_size;
  for (std::size_t i = 0; i < high_channels.size(); ++i) encoder /= 2;
  FH_REQUIRE(encoder == kEncoderOutputSize,
             "model config: encoder must reach " + std::to_string(kEncoderOutputSize) + "x" +
                 std::to_string(kEncoderOutputSize) + " for a " + std::to_string(kInputSize) +
                 " input; " + std::to_string(high_channels.size()) + " High stages reach " +
                 std::to_string(encoder));

  FH_REQUIRE(middle_depth >= 1 && (middle_size >> middle_depth) >= kEncoderOutputSize,
             "model config: Middle hourglass depth " + std::to_string(middle_depth) +
                 " underflows the " + std::to_string(middle_size) + "-pixel entry resolution");

  const int decoded = kEncoderOutputSize << kDeconvStages;
  FH_REQUIRE(decoded == kHeatmapSize, "model config: decoder must restore 64x64 heatmaps");
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "default") return ModelConfig{};
  if (name == "small") {
    ModelConfig c;
    c.stem_channels = 16;
    c.low_out_channels = 32;
    c.middle_channels = 32;
    c.high_channels = {48, 96, 96};
    c.decoder_channels = {48, 24, 24};
    c.residual_repeats = 2;
    return c;
  }
  if (name == "slim") {
    ModelConfig c;
    c.stem_channels = 24;
    c.low_out_channels = 48;
    c.middle_channels = 48;
    c.high_channels = {64, 96, 96};
    c.decoder_channels = {64, 32, 32};
    c.residual_repeats = 3;
    return c;
  }
  throw ContractViolation("unknown model preset '" + name + "'");
}

std::vector<std::string> ModelConfig::preset_names() { return {"default", "small", "slim"}; }

Tensor residual_block(const Tensor& input, const ResidualBlockWeights& w) {
  Tensor branch = relu(depthwise_separable_conv(input, w.c1.dw, w.c1.pw, 1));
  branch = depthwise_separable_conv(branch, w.c2.dw, w.c2.pw, 1);
  const Tensor shortcut = w.projection ? pointwise_conv(input, *w.projection) : input;
  FH_REQUIRE(shortcut.same_shape(branch),
             "residual_block: shortcut " + shortcut.shape_string() + " does not match branch " +
                 branch.shape_string() + " (projection required?)");
  return relu(add(shortcut, branch));
}

Tensor downsample_block(const Tensor& input, const DownBlockWeights& w) {
  FH_REQUIRE(input.height() % 2 == 0 && input.width() % 2 == 0,
             "downsample_block: input spatial size must be even, got " + input.shape_string());
  Tensor x = input;
  for (const ResidualBlockWeights& r : w.residuals) x = residual_block(x, r);
  return relu(depthwise_separable_conv(x, w.reduce.dw, w.reduce.pw, 2));
}

Tensor upsample_block(const Tensor& input, const Tensor& skip, const UpBlockWeights& w) {
  FH_REQUIRE(skip.height() == 2 * input.height() && skip.width() == 2 * input.width(),
             "upsample_block: skip " + skip.shape_string() + " must be twice the input " +
                 input.shape_string());
  Tensor x = input;
  for (const ResidualBlockWeights& r : w.residuals) x = residual_block(x, r);
  x = relu(depthwise_separable_conv(x, w.conv.dw, w.conv.pw, 1));
  x = resize_bilinear(x, skip.height(), skip.width());
  return add(x, skip);
}

Model build_fasthand(const ModelConfig& config, std::uint32_t seed) {
  config.validate();
  Model model;
  model.config = config;
  model.stem = ConvWeights::dense(3, 3, 3, config.stem_channels);
  model.low = make_down(config.stem_channels, config.low_out_channels, config.residual_repeats);
  for (int i = 0; i < config.middle_depth; ++i) {
    model.middle_down.push_back(
        make_down(config.middle_channels, config.middle_channels, config.residual_repeats));
    model.middle_up.push_back(make_up(config.middle_channels, config.residual_repeats));
  }
  int channels = config.middle_channels;
  for (int high_out : config.high_channels) {
    model.high.push_back(make_down(channels, high_out, config.residual_repeats));
    channels = high_out;
  }
  for (int deconv_out : config.decoder_channels) {
    model.deconvs.push_back(ConvWeights::dense(4, 4, channels, deconv_out));
    channels = deconv_out;
  }
  model.head = ConvWeights::dense(1, 1, channels, config.output_channels);

  std::mt19937 rng(seed);
  visit_parameters(model, [&rng](const std::string&, ConvWeights& w) {
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in(w)));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : w.values) v = dist(rng);
    // biases stay zero
  });
  return model;
}

std::size_t param_count(const Model& model) {
  std::size_t count = 0;
  visit_parameters(model,
                   [&count](const std::string&, const ConvWeights& w) { count += w.param_count(); });
  return count;
}

Tensor forward(const Model& model, const Tensor& input, ForwardTrace* trace) {
  FH_REQUIRE(input.height() == kInputSize && input.width() == kInputSize && input.channels() == 3,
             "forward: input must be 256x256x3, got " + input.shape_string());

  Tensor x = relu(conv2d(input, model.stem, 2, Padding::kSame));
  x = downsample_block(x, model.low);

  std::vector<Tensor> skips;
  skips.reserve(model.middle_down.size());
  for (const DownBlockWeights& down : model.middle_down) {
    skips.push_back(x);
    x = downsample_block(x, down);
  }
  for (std::size_t i = 0; i < model.middle_up.size(); ++i) {
    x = upsample_block(x, skips[skips.size() - 1 - i], model.middle_up[i]);
  }

  for (const DownBlockWeights& down : model.high) x = downsample_block(x, down);
  if (trace) trace->encoder_output = x;

  for (const ConvWeights& deconv : model.deconvs) {
    x = relu(transposed_conv2d(x, deconv, 2));
  }
  return pointwise_conv(x, model.head);
}

void visit_parameters(Model& model,
                      const std::function<void(const std::string&, ConvWeights&)>& fn) {
  visit_impl(model, fn);
}

void visit_parameters(const Model& model,
                      const std::function<void(const std::string&, const ConvWeights&)>& fn) {
  visit_impl(model, fn);
}

}  // namespace fasthand
