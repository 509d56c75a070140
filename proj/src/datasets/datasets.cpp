#include "zsel/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "zsel/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace zsel::data {

namespace {

constexpr char kContainerMagic[] = "ZSELDS1";  // 7 bytes on disk
constexpr std::size_t kMagicLen = 7;
constexpr std::size_t kCifarRecord = 3073;  // 1 label byte + 3*32*32 pixels

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw std::runtime_error("container truncated");
}

}  // namespace

Dataset gen_blobs(int num_classes, int dims, int samples_per_class,
                  float separation, float noise_sigma, uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("need at least two blob classes");
  if (dims < num_classes) {
    throw std::invalid_argument("blob dims must be >= num_classes");
  }
  if (samples_per_class < 1) throw std::invalid_argument("samples_per_class must be >= 1");
  if (!(separation > 0.0f && separation <= 1.0f)) {
    throw std::invalid_argument("separation must lie in (0,1]");
  }
  if (noise_sigma < 0.0f) throw std::invalid_argument("noise_sigma must be >= 0");

  // Center i = offset + separation * e_i, with the offset placing both
  // coordinate levels symmetrically inside [0,1].
  const float offset = (1.0f - separation) / 2.0f;

  RngStream rng(seed);
  Dataset ds;
  ds.num_classes = num_classes;
  ds.items.reserve(std::size_t(num_classes) * samples_per_class);
  for (int cls = 0; cls < num_classes; ++cls) {
    for (int s = 0; s < samples_per_class; ++s) {
      Image img(1, 1, dims);
      for (int d = 0; d < dims; ++d) {
        float v = offset + (d == cls ? separation : 0.0f);
        v += noise_sigma * rng.normal();
        img.pix[d] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      }
      ds.items.push_back({std::move(img), uint16_t(cls)});
    }
  }
  return ds;
}

Dataset read_cifar10(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("cannot open " + path);
  const auto size = std::size_t(f.tellg());
  if (size % kCifarRecord != 0) {
    throw std::runtime_error(path + ": size is not a multiple of 3073");
  }
  f.seekg(0);

  Dataset ds;
  ds.num_classes = 10;
  const std::size_t count = size / kCifarRecord;
  ds.items.reserve(count);
  std::vector<unsigned char> rec(kCifarRecord);
  for (std::size_t i = 0; i < count; ++i) {
    f.read(reinterpret_cast<char*>(rec.data()), kCifarRecord);
    if (!f) throw std::runtime_error(path + ": short read");
    if (rec[0] > 9) throw std::runtime_error(path + ": label byte out of range");
    Image img(3, 32, 32);
    for (std::size_t p = 0; p < 3072; ++p) {
      img.pix[p] = float(rec[1 + p]) / 255.0f;
    }
    ds.items.push_back({std::move(img), uint16_t(rec[0])});
  }
  return ds;
}

Split split(const Dataset& ds, const SplitSpec& spec) {
  if (ds.num_classes < 1) throw std::invalid_argument("dataset has no classes");
  if (!(spec.train_fraction > 0.0f && spec.train_fraction < 1.0f)) {
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  }

  std::vector<bool> excluded(ds.num_classes, false);
  for (int c : spec.excluded_classes) {
    if (c < 0 || c >= ds.num_classes) {
      throw std::invalid_argument("excluded class id out of range");
    }
    excluded[c] = true;
  }

  Split out;
  std::vector<int> remap(ds.num_classes, -1);
  for (int c = 0; c < ds.num_classes; ++c) {
    if (!excluded[c]) {
      remap[c] = int(out.kept_classes.size());
      out.kept_classes.push_back(c);
    }
  }
  if (out.kept_classes.empty()) {
    throw std::invalid_argument("cannot exclude every class");
  }

  std::vector<std::size_t> kept_idx;
  kept_idx.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (excluded[ds.items[i].label]) {
      out.test_out.items.push_back(ds.items[i]);
    } else {
      kept_idx.push_back(i);
    }
  }
  out.test_out.num_classes = ds.num_classes;

  // Deterministic Fisher-Yates; std::shuffle is not pinned across libraries.
  RngStream rng(spec.seed);
  for (std::size_t i = kept_idx.size(); i > 1; --i) {
    const std::size_t j = std::size_t(rng.uniform_int(0, int(i - 1)));
    std::swap(kept_idx[i - 1], kept_idx[j]);
  }

  const std::size_t n_train = std::size_t(double(spec.train_fraction) * kept_idx.size());
  for (std::size_t k = 0; k < kept_idx.size(); ++k) {
    LabeledImage item = ds.items[kept_idx[k]];
    item.label = uint16_t(remap[item.label]);
    (k < n_train ? out.train : out.test_in).items.push_back(std::move(item));
  }
  out.train.num_classes = int(out.kept_classes.size());
  out.test_in.num_classes = int(out.kept_classes.size());
  return out;
}

void write_container(const std::string& path, const Dataset& ds) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);

  uint32_t c = 0, h = 0, w = 0;
  if (!ds.items.empty()) {
    c = uint32_t(ds.items[0].image.channels);
    h = uint32_t(ds.items[0].image.height);
    w = uint32_t(ds.items[0].image.width);
  }
  for (const auto& it : ds.items) {
    if (uint32_t(it.image.channels) != c || uint32_t(it.image.height) != h ||
        uint32_t(it.image.width) != w) {
      throw std::invalid_argument("container requires uniform image shapes");
    }
  }

  f.write(kContainerMagic, kMagicLen);
  write_pod(f, uint32_t(ds.items.size()));
  write_pod(f, c);
  write_pod(f, h);
  write_pod(f, w);
  for (const auto& it : ds.items) {
    write_pod(f, uint16_t(it.label));
    f.write(reinterpret_cast<const char*>(it.image.pix.data()),
            std::streamsize(it.image.pix.size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

Dataset read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);

  char magic[kMagicLen];
  f.read(magic, kMagicLen);
  if (!f || std::memcmp(magic, kContainerMagic, kMagicLen) != 0) {
    throw std::runtime_error(path + ": not a ZSELDS1 container");
  }
  uint32_t count = 0, c = 0, h = 0, w = 0;
  read_pod(f, count);
  read_pod(f, c);
  read_pod(f, h);
  read_pod(f, w);
  if (count > 0 && (c == 0 || h == 0 || w == 0)) {
    throw std::runtime_error(path + ": bad container dimensions");
  }

  Dataset ds;
  ds.items.reserve(count);
  int max_label = -1;
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t label = 0;
    read_pod(f, label);
    Image img(int(c), int(h), int(w));
    f.read(reinterpret_cast<char*>(img.pix.data()),
           std::streamsize(img.pix.size() * sizeof(float)));
    if (!f) throw std::runtime_error(path + ": container truncated");
    max_label = std::max(max_label, int(label));
    ds.items.push_back({std::move(img), label});
  }
  ds.num_classes = max_label + 1;
  return ds;
}

Tensor flatten(const Image& img) {
  Tensor t({img.size()});
  std::copy(img.pix.begin(), img.pix.end(), t.data.begin());
  return t;
}

}  // namespace zsel::data
