#include "zsel/distort.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zsel/kernels.hpp"
#include "zsel/rng.hpp"

namespace zsel::distort {

namespace {

inline int clampi(int v, int lo, int hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

void check_image(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels");
  }
  if (img.height < 1 || img.width < 1) {
    throw std::invalid_argument("image must be non-empty");
  }
}

}  // namespace

Image motion_blur(const Image& img, int length, float angle_degrees) {
  check_image(img);
  if (length < 1 || length % 2 == 0) {
    throw std::invalid_argument("motion blur length must be odd and >= 1");
  }

  // Rasterize a line of `length` unit steps through the kernel center.
  // Cells are deduplicated (steep angles can round onto the same cell) and
  // weighted uniformly.
  const double rad = double(angle_degrees) * M_PI / 180.0;
  const double cx = std::cos(rad), cy = std::sin(rad);
  std::set<std::pair<int, int>> cells;  // (dy, dx)
  const int half = (length - 1) / 2;
  for (int t = -half; t <= half; ++t) {
    cells.insert({int(std::lround(t * cy)), int(std::lround(t * cx))});
  }
  const float w = 1.0f / float(cells.size());

  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        double acc = 0.0;
        for (const auto& [dy, dx] : cells) {
          acc += img.at(c, clampi(y + dy, 0, img.height - 1),
                        clampi(x + dx, 0, img.width - 1));
        }
        float v = float(acc * w);
        out.at(c, y, x) = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      }
    }
  }
  return out;
}

Image frosted_glass(const Image& img, int radius, uint64_t seed) {
  check_image(img);
  if (radius < 0) throw std::invalid_argument("frosted glass radius must be >= 0");

  RngStream rng(seed);
  Image out(img.channels, img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int dy = rng.uniform_int(-radius, radius);
      const int dx = rng.uniform_int(-radius, radius);
      const int sy = clampi(y + dy, 0, img.height - 1);
      const int sx = clampi(x + dx, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = img.at(c, sy, sx);
    }
  }
  return out;
}

Image gaussian_blur(const Image& img, float sigma) {
  check_image(img);
  if (!(sigma > 0.0f)) throw std::invalid_argument("gaussian blur sigma must be > 0");

  const int radius = int(std::ceil(3.0 * double(sigma)));
  const int taps = 2 * radius + 1;
  std::vector<double> kd(taps);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kd[i + radius] = std::exp(-double(i) * i / (2.0 * double(sigma) * sigma));
    sum += kd[i + radius];
  }
  std::vector<float> kernel(taps);
  for (int i = 0; i < taps; ++i) kernel[i] = float(kd[i] / sum);

  const int h = img.height, w = img.width;

  // Horizontal pass: interior via a contiguous dot, edges clamp.
  Image tmp(img.channels, h, w);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      const float* src = img.row(c, y);
      float* dst = tmp.row(c, y);
      int x = 0;
      for (; x < std::min(radius, w); ++x) {
        float acc = 0.0f;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * src[clampi(x + i, 0, w - 1)];
        }
        dst[x] = acc;
      }
      for (; x + radius < w; ++x) {
        dst[x] = kernels::dot(kernel.data(), src + x - radius, taps);
      }
      for (; x < w; ++x) {
        float acc = 0.0f;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * src[clampi(x + i, 0, w - 1)];
        }
        dst[x] = acc;
      }
    }
  }

  // Vertical pass: whole rows accumulated with axpy.
  Image out(img.channels, h, w);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      float* dst = out.row(c, y);
      std::fill(dst, dst + w, 0.0f);
      for (int i = -radius; i <= radius; ++i) {
        kernels::axpy(kernel[i + radius], tmp.row(c, clampi(y + i, 0, h - 1)), dst, w);
      }
    }
  }
  for (auto& v : out.pix) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return out;
}

Image gaussian_noise(const Image& img, float sigma, uint64_t seed) {
  check_image(img);
  if (sigma < 0.0f) throw std::invalid_argument("noise sigma must be >= 0");

  RngStream rng(seed);
  std::vector<float> noise(img.size());
  for (auto& n : noise) n = rng.normal();
  Image out(img.channels, img.height, img.width);
  kernels::add_scaled_clamp01(img.pix.data(), noise.data(), sigma,
                              out.pix.data(), img.size());
  return out;
}

Image salt_pepper(const Image& img, float p, uint64_t seed) {
  check_image(img);
  if (!(p >= 0.0f && p <= 1.0f)) {
    throw std::invalid_argument("salt & pepper probability must lie in [0,1]");
  }

  RngStream rng(seed);
  Image out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (rng.uniform() < double(p)) {
        const float v = rng.uniform() < 0.5 ? 0.0f : 1.0f;
        for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = v;
      }
    }
  }
  return out;
}

Image gamma_correct(const Image& img, float gamma) {
  check_image(img);
  if (!(gamma > 0.0f) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
  if (gamma == 1.0f) return img;

  Image out(img.channels, img.height, img.width);
  for (std::size_t i = 0; i < img.size(); ++i) {
    out.pix[i] = std::pow(img.pix[i], gamma);
  }
  return out;
}

Image occlude(const Image& img, int x, int y, int w, int h) {
  check_image(img);
  if (w < 0 || h < 0) throw std::invalid_argument("occlusion extent must be >= 0");

  const int x0 = clampi(x, 0, img.width);
  const int y0 = clampi(y, 0, img.height);
  const int x1 = clampi(x + w, 0, img.width);
  const int y1 = clampi(y + h, 0, img.height);

  Image out = img;
  for (int c = 0; c < img.channels; ++c) {
    for (int yy = y0; yy < y1; ++yy) {
      for (int xx = x0; xx < x1; ++xx) out.at(c, yy, xx) = 0.0f;
    }
  }
  return out;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kMotionBlur: return "motion_blur";
    case Kind::kFrostedGlass: return "frosted_glass";
    case Kind::kGaussianBlur: return "gaussian_blur";
    case Kind::kGaussianNoise: return "gaussian_noise";
    case Kind::kSaltPepper: return "salt_pepper";
    case Kind::kGamma: return "gamma";
    case Kind::kOcclusion: return "occlusion";
  }
  return "?";
}

DistortionSpec parse_spec(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("distortion spec items must be key=value: " + item);
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  const auto kind_it = kv.find("kind");
  if (kind_it == kv.end()) {
    throw std::invalid_argument("distortion spec needs kind=...");
  }

  DistortionSpec spec;
  const std::string& kind = kind_it->second;
  if (kind == "motion_blur") spec.kind = Kind::kMotionBlur;
  else if (kind == "frosted_glass") spec.kind = Kind::kFrostedGlass;
  else if (kind == "gaussian_blur") spec.kind = Kind::kGaussianBlur;
  else if (kind == "gaussian_noise") spec.kind = Kind::kGaussianNoise;
  else if (kind == "salt_pepper") spec.kind = Kind::kSaltPepper;
  else if (kind == "gamma") spec.kind = Kind::kGamma;
  else if (kind == "occlusion") spec.kind = Kind::kOcclusion;
  else throw std::invalid_argument("unknown distortion kind: " + kind);

  for (const auto& [key, value] : kv) {
    if (key == "kind") continue;
    if (key == "length") spec.length = std::stoi(value);
    else if (key == "angle") spec.angle_degrees = std::stof(value);
    else if (key == "radius") spec.radius = std::stoi(value);
    else if (key == "sigma") {
      spec.sigma = std::stof(value);        // gaussian blur
      spec.noise_sigma = std::stof(value);  // gaussian noise
    } else if (key == "p") spec.prob = std::stof(value);
    else if (key == "gamma") spec.gamma = std::stof(value);
    else if (key == "area") spec.occlusion_area = std::stof(value);
    else throw std::invalid_argument("unknown distortion parameter: " + key);
  }
  return spec;
}

Image apply(const DistortionSpec& spec, const Image& img, uint64_t seed) {
  switch (spec.kind) {
    case Kind::kMotionBlur:
      return motion_blur(img, spec.length, spec.angle_degrees);
    case Kind::kFrostedGlass:
      return frosted_glass(img, spec.radius, seed);
    case Kind::kGaussianBlur:
      return gaussian_blur(img, spec.sigma);
    case Kind::kGaussianNoise:
      return gaussian_noise(img, spec.noise_sigma, seed);
    case Kind::kSaltPepper:
      return salt_pepper(img, spec.prob, seed);
    case Kind::kGamma:
      return gamma_correct(img, spec.gamma);
    case Kind::kOcclusion: {
      // Centered patch covering `occlusion_area` of the image. Side lengths
      // scale with sqrt(area); rows collapse to 1 for vector-shaped images.
      const double side = std::sqrt(double(spec.occlusion_area));
      int oh = std::max(1, int(std::lround(side * img.height)));
      int ow = std::max(1, int(std::lround(side * img.width)));
      if (img.height == 1) {
        ow = std::max(1, int(std::lround(double(spec.occlusion_area) * img.width)));
      } else if (img.width == 1) {
        oh = std::max(1, int(std::lround(double(spec.occlusion_area) * img.height)));
      }
      const int x = (img.width - ow) / 2;
      const int y = (img.height - oh) / 2;
      return occlude(img, x, y, ow, oh);
    }
  }
  throw std::invalid_argument("unknown distortion kind");
}

std::vector<std::pair<std::string, DistortionSpec>> default_suite() {
  std::vector<std::pair<std::string, DistortionSpec>> suite;
  DistortionSpec s;

  s = {}; s.kind = Kind::kMotionBlur; s.length = 9; s.angle_degrees = 0.0f;
  suite.emplace_back("motion_blur", s);
  s = {}; s.kind = Kind::kFrostedGlass; s.radius = 2;
  suite.emplace_back("frosted_glass", s);
  s = {}; s.kind = Kind::kGaussianBlur; s.sigma = 1.5f;
  suite.emplace_back("gaussian_blur", s);
  s = {}; s.kind = Kind::kGaussianNoise; s.noise_sigma = 0.05f;
  suite.emplace_back("gaussian_noise", s);
  s = {}; s.kind = Kind::kSaltPepper; s.prob = 0.05f;
  suite.emplace_back("salt_pepper", s);
  s = {}; s.kind = Kind::kGamma; s.gamma = 2.0f;
  suite.emplace_back("gamma_dark", s);
  s = {}; s.kind = Kind::kGamma; s.gamma = 0.5f;
  suite.emplace_back("gamma_light", s);
  s = {}; s.kind = Kind::kOcclusion; s.occlusion_area = 0.25f;
  suite.emplace_back("occlusion", s);
  return suite;
}

}  // namespace zsel::distort
