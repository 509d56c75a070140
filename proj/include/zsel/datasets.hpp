#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zsel/image.hpp"
#include "zsel/tensor.hpp"

namespace zsel::data {

struct LabeledImage {
  Image image;
  uint16_t label = 0;
};

struct Dataset {
  std::vector<LabeledImage> items;
  int num_classes = 0;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
};

// Synthetic Gaussian-blob classes. Class centers sit on the vertices of a
// scaled axis-aligned simplex (center i has coordinate `separation` in
// dimension i, shifted so everything fits in [0,1]); samples are
// center + N(0, noise_sigma^2), clamped to [0,1] so the corruption operators
// stay in-domain. Requires dims >= num_classes and separation in (0, 1].
Dataset gen_blobs(int num_classes, int dims, int samples_per_class,
                  float separation, float noise_sigma, uint64_t seed);

// CIFAR-10 binary batch: 3073-byte records, one label byte then 3x32x32
// planar RGB pixel bytes, scaled to [0,1] by /255.
Dataset read_cifar10(const std::string& path);

struct SplitSpec {
  std::vector<int> excluded_classes;
  float train_fraction = 0.8f;  // fraction of kept-class samples that train
  uint64_t seed = 0;
};

struct Split {
  Dataset train;     // kept classes only, labels re-indexed densely
  Dataset test_in;   // kept classes, re-indexed like train
  Dataset test_out;  // excluded classes, original labels
  std::vector<int> kept_classes;  // new label -> original label
};

// Partition: every input sample lands in exactly one of the three parts.
Split split(const Dataset& ds, const SplitSpec& spec);

// Container format ZSELDS1: magic, u32 count, u32 C,H,W, then per record a
// u16 label and C*H*W little-endian f32 pixels. All records share one shape.
void write_container(const std::string& path, const Dataset& ds);
Dataset read_container(const std::string& path);

Tensor flatten(const Image& img);

}  // namespace zsel::data
