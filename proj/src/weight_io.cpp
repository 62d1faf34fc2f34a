#include "fasthand/weight_io.hpp"

#include <cstring>
#include <fstream>

namespace fasthand {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'T', 'H'};
constexpr std::uint32_t kVersion = 1;

void write_u16(std::ostream& out, std::uint16_t v) {
  char buf[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(buf, 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char buf[2];
  in.read(reinterpret_cast<char*>(buf), 2);
  return static_cast<std::uint16_t>(buf[0] | (buf[1] << 8));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

void write_tensor(std::ostream& out, const std::string& name,
                  const std::vector<std::uint32_t>& dims, const float* values,
                  std::size_t count) {
  write_u16(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  out.put(static_cast<char>(dims.size()));
  for (std::uint32_t d : dims) write_u32(out, d);
  // floats are written through their bit pattern; host is little-endian
  out.write(reinterpret_cast<const char*>(values), static_cast<std::streamsize>(count * 4));
}

std::vector<std::uint32_t> weight_dims(const ConvWeights& w) {
  if (w.depthwise) {
    return {static_cast<std::uint32_t>(w.kernel_h), static_cast<std::uint32_t>(w.kernel_w),
            static_cast<std::uint32_t>(w.in_channels)};
  }
  return {static_cast<std::uint32_t>(w.kernel_h), static_cast<std::uint32_t>(w.kernel_w),
          static_cast<std::uint32_t>(w.in_channels), static_cast<std::uint32_t>(w.out_channels)};
}

const StoredTensor& fetch(const WeightStore& store, const std::string& name) {
  auto it = store.find(name);
  if (it == store.end()) throw FormatError("weight store: missing tensor '" + name + "'");
  return it->second;
}

std::string dims_string(const std::vector<std::uint32_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s;
}

void bind(const WeightStore& store, const std::string& name, ConvWeights& w) {
  const StoredTensor& weight = fetch(store, name + ".weight");
  const std::vector<std::uint32_t> expected = weight_dims(w);
  if (weight.dims != expected) {
    throw FormatError("weight store: tensor '" + name + ".weight' has dims " +
                      dims_string(weight.dims) + ", expected " + dims_string(expected));
  }
  w.values = weight.values;

  const StoredTensor& bias = fetch(store, name + ".bias");
  if (bias.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(w.out_channels)}) {
    throw FormatError("weight store: tensor '" + name + ".bias' has dims " +
                      dims_string(bias.dims) + ", expected " + std::to_string(w.out_channels));
  }
  w.bias = bias.values;
  w.validate();
}

// Number of "prefixN..." groups present in the store.
int count_stages(const WeightStore& store, const std::string& prefix) {
  int count = 0;
  while (store.count(prefix + std::to_string(count) + ".reduce.pw.weight") ||
         store.count(prefix + std::to_string(count) + ".conv.pw.weight") ||
         store.count(prefix + std::to_string(count) + ".weight")) {
    ++count;
  }
  return count;
}

}  // namespace

void save_weights(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");

  std::uint32_t tensor_count = 0;
  visit_parameters(model, [&tensor_count](const std::string&, const ConvWeights&) {
    tensor_count += 2;  // weight + bias
  });

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, tensor_count);
  visit_parameters(model, [&out](const std::string& name, const ConvWeights& w) {
    write_tensor(out, name + ".weight", weight_dims(w), w.values.data(), w.values.size());
    write_tensor(out, name + ".bias", {static_cast<std::uint32_t>(w.out_channels)},
                 w.bias.data(), w.bias.size());
  });
  out.flush();
  if (!out) throw FormatError("failed writing weights to '" + path.string() + "'");
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open weight file '" + path.string() + "'");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("'" + path.string() + "' is not a FSTH weight file (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (!in || version != kVersion) {
    throw FormatError("'" + path.string() + "': unsupported weight format version " +
                      std::to_string(version));
  }
  const std::uint32_t tensor_count = read_u32(in);
  if (!in) throw FormatError("'" + path.string() + "': truncated header");

  WeightStore store;
  for (std::uint32_t t = 0; t < tensor_count; ++t) {
    const std::uint16_t name_len = read_u16(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) {
      throw FormatError("'" + path.string() + "': truncated reading the name of tensor " +
                        std::to_string(t));
    }
    const int rank = in.get();
    if (rank <= 0 || rank > 4) {
      throw FormatError("'" + path.string() + "': tensor '" + name + "' has invalid rank " +
                        std::to_string(rank));
    }
    StoredTensor tensor;
    std::size_t count = 1;
    for (int d = 0; d < rank; ++d) {
      const std::uint32_t dim = read_u32(in);
      tensor.dims.push_back(dim);
      count *= dim;
    }
    if (!in || count == 0) {
      throw FormatError("'" + path.string() + "': tensor '" + name + "' has invalid dims");
    }
    tensor.values.resize(count);
    in.read(reinterpret_cast<char*>(tensor.values.data()),
            static_cast<std::streamsize>(count * 4));
    if (!in) {
      throw FormatError("'" + path.string() + "': truncated reading tensor '" + name + "'");
    }
    if (!store.emplace(std::move(name), std::move(tensor)).second) {
      throw FormatError("'" + path.string() + "': duplicate tensor name");
    }
  }
  return store;
}

ModelConfig infer_config(const WeightStore& store) {
  ModelConfig config;
  const StoredTensor& stem = fetch(store, "stem.weight");
  if (stem.dims.size() != 4) throw FormatError("weight store: 'stem.weight' must be rank 4");
  config.stem_channels = static_cast<int>(stem.dims[3]);

  int repeats = 0;
  while (store.count("low.res" + std::to_string(repeats) + ".c1.dw.weight")) ++repeats;
  if (repeats == 0) throw FormatError("weight store: no 'low.res0' residual block");
  config.residual_repeats = repeats;

  config.low_out_channels = static_cast<int>(fetch(store, "low.reduce.pw.weight").dims[3]);
  config.middle_channels = config.low_out_channels;
  config.middle_depth = count_stages(store, "mid.down");
  if (config.middle_depth == 0) throw FormatError("weight store: no Middle hourglass stages");

  const int high_stages = count_stages(store, "high");
  config.high_channels.clear();
  for (int i = 0; i < high_stages; ++i) {
    config.high_channels.push_back(static_cast<int>(
        fetch(store, "high" + std::to_string(i) + ".reduce.pw.weight").dims[3]));
  }

  const int deconv_stages = count_stages(store, "deconv");
  config.decoder_channels.clear();
  for (int i = 0; i < deconv_stages; ++i) {
    config.decoder_channels.push_back(
        static_cast<int>(fetch(store, "deconv" + std::to_string(i) + ".weight").dims[3]));
  }

  config.output_channels = static_cast<int>(fetch(store, "head.weight").dims[3]);
  config.validate();
  return config;
}

Model build_fasthand(const ModelConfig& config, const WeightStore& store) {
  Model model = build_fasthand(config, std::uint32_t{0});
  visit_parameters(model,
                   [&store](const std::string& name, ConvWeights& w) { bind(store, name, w); });
  return model;
}

Model load_model(const std::filesystem::path& path) {
  const WeightStore store = load_weights(path);
  return build_fasthand(infer_config(store), store);
}

}  // namespace fasthand
