#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "zsel/net.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts are unsupported");

namespace zsel::net {

namespace {

constexpr char kMagic[8] = {'Z', 'S', 'E', 'L', 'M', 'D', 'L', '1'};

void write_f32(std::ofstream& f, const Tensor& t) {
  f.write(reinterpret_cast<const char*>(t.data.data()),
          std::streamsize(t.data.size() * sizeof(float)));
}

void read_f32(std::ifstream& f, Tensor& t, const std::string& path) {
  f.read(reinterpret_cast<char*>(t.data.data()),
         std::streamsize(t.data.size() * sizeof(float)));
  if (!f) throw std::runtime_error(path + ": checkpoint truncated");
}

}  // namespace

void save_model(const std::string& path, const StochasticModel& m) {
  m.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);

  f.write(kMagic, sizeof kMagic);
  const uint32_t n_layers = uint32_t(m.layers.size());
  f.write(reinterpret_cast<const char*>(&n_layers), sizeof n_layers);
  for (const auto& layer : m.layers) {
    const uint32_t out = uint32_t(layer.out_dim());
    const uint32_t in = uint32_t(layer.in_dim());
    const uint8_t act = uint8_t(layer.activation);
    f.write(reinterpret_cast<const char*>(&out), sizeof out);
    f.write(reinterpret_cast<const char*>(&in), sizeof in);
    f.write(reinterpret_cast<const char*>(&act), sizeof act);
    write_f32(f, layer.weight_mean);
    write_f32(f, layer.weight_log_std);
    write_f32(f, layer.bias);
  }
  const uint8_t mode = uint8_t(m.noise_mode);
  f.write(reinterpret_cast<const char*>(&mode), sizeof mode);
  if (!f) throw std::runtime_error("write failed: " + path);
}

StochasticModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);

  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error(path + ": not a ZSELMDL1 checkpoint");
  }
  uint32_t n_layers = 0;
  f.read(reinterpret_cast<char*>(&n_layers), sizeof n_layers);
  if (!f || n_layers == 0 || n_layers > 1u << 16) {
    throw std::runtime_error(path + ": bad layer count");
  }

  StochasticModel m;
  for (uint32_t l = 0; l < n_layers; ++l) {
    uint32_t out = 0, in = 0;
    uint8_t act = 0;
    f.read(reinterpret_cast<char*>(&out), sizeof out);
    f.read(reinterpret_cast<char*>(&in), sizeof in);
    f.read(reinterpret_cast<char*>(&act), sizeof act);
    if (!f || out == 0 || in == 0) throw std::runtime_error(path + ": bad layer dims");
    if (act > 1) throw std::runtime_error(path + ": bad activation tag");

    StochasticLayer layer;
    layer.weight_mean = Tensor({out, in});
    layer.weight_log_std = Tensor({out, in});
    layer.bias = Tensor({out});
    layer.activation = Activation(act);
    read_f32(f, layer.weight_mean, path);
    read_f32(f, layer.weight_log_std, path);
    read_f32(f, layer.bias, path);
    if (!layer.weight_mean.all_finite() || !layer.weight_log_std.all_finite() ||
        !layer.bias.all_finite()) {
      throw std::runtime_error(path + ": non-finite parameters");
    }
    m.layers.push_back(std::move(layer));
  }
  uint8_t mode = 0;
  f.read(reinterpret_cast<char*>(&mode), sizeof mode);
  if (!f || mode > 1) throw std::runtime_error(path + ": bad noise mode flag");
  m.noise_mode = NoiseMode(mode);
  m.validate();
  return m;
}

}  // namespace zsel::net
