#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zsel/image.hpp"

// Test-time image corruptions: three blurs, two noises, gamma correction,
// and a black occlusion patch. Every operator maps [0,1] images to [0,1]
// images and the stochastic ones are pure functions of (image, params, seed).
namespace zsel::distort {

// Normalized 1-pixel-wide line kernel of the given length and angle,
// clamp-to-edge convolution. length must be odd and >= 1.
Image motion_blur(const Image& img, int length, float angle_degrees);

// Each output pixel copies a uniformly chosen input pixel within Chebyshev
// distance `radius` (the same displacement for all channels of a position).
Image frosted_glass(const Image& img, int radius, uint64_t seed);

// Separable Gaussian kernel, radius ceil(3*sigma), renormalized after
// truncation, clamp-to-edge. sigma must be > 0.
Image gaussian_blur(const Image& img, float sigma);

// Adds N(0, sigma^2) per value, clamps to [0,1].
Image gaussian_noise(const Image& img, float sigma, uint64_t seed);

// With probability p a position is forced to 0 or 1 (equal odds, all
// channels together).
Image salt_pepper(const Image& img, float p, uint64_t seed);

// out = in^gamma. gamma > 1 darkens, gamma < 1 lightens.
Image gamma_correct(const Image& img, float gamma);

// Zeroes the rectangle [x, x+w) x [y, y+h) intersected with the image, in
// all channels.
Image occlude(const Image& img, int x, int y, int w, int h);

enum class Kind {
  kMotionBlur,
  kFrostedGlass,
  kGaussianBlur,
  kGaussianNoise,
  kSaltPepper,
  kGamma,
  kOcclusion,
};

struct DistortionSpec {
  Kind kind = Kind::kGaussianNoise;
  int length = 9;            // motion blur
  float angle_degrees = 0.0f;
  int radius = 2;            // frosted glass
  float sigma = 1.5f;        // gaussian blur
  float noise_sigma = 0.05f; // gaussian noise
  float prob = 0.05f;        // salt & pepper
  float gamma = 2.0f;
  float occlusion_area = 0.25f;  // centered patch, fraction of image area
};

const char* kind_name(Kind k);

// Parses "kind=gaussian_noise,sigma=0.05" style strings. Unknown kinds or
// parameters throw std::invalid_argument.
DistortionSpec parse_spec(const std::string& text);

// Applies the distortion; `seed` feeds the stochastic kinds.
Image apply(const DistortionSpec& spec, const Image& img, uint64_t seed);

// The default severity suite: one entry per corruption, gamma twice
// (darkening 2.0 and lightening 0.5).
std::vector<std::pair<std::string, DistortionSpec>> default_suite();

}  // namespace zsel::distort
