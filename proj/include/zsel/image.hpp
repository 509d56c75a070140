#pragma once

#include <cstddef>
#include <vector>

namespace zsel {

// Planar row-major image, pixel values in [0,1]. channels is 1 or 3.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> pix;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        pix(std::size_t(c) * h * w, fill) {}

  std::size_t size() const { return pix.size(); }

  float& at(int c, int y, int x) {
    return pix[(std::size_t(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return pix[(std::size_t(c) * height + y) * width + x];
  }

  float* plane(int c) { return pix.data() + std::size_t(c) * height * width; }
  const float* plane(int c) const {
    return pix.data() + std::size_t(c) * height * width;
  }

  float* row(int c, int y) { return plane(c) + std::size_t(y) * width; }
  const float* row(int c, int y) const {
    return plane(c) + std::size_t(y) * width;
  }
};

}  // namespace zsel
