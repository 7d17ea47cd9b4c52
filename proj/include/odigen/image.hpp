#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace odigen {

// Planar channel-major image, values normalized to [0, 1].
// Equirectangular panoramas must satisfy width == 2 * height.
struct Image {
  int width = 0, height = 0, channels = 0;
  std::vector<float> pixels;  // [c][y][x]

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || c <= 0)
      throw std::invalid_argument("Image: non-positive dimension");
  }

  float& at(int c, int y, int x) {
    return pixels[(static_cast<size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return pixels[(static_cast<size_t>(c) * height + y) * width + x];
  }

  bool is_equirect() const { return width == 2 * height; }

  bool values_valid() const {
    for (float v : pixels)
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f) return false;
    return true;
  }
};

// Binary per-pixel mask stored as 0/1 floats, single channel.
struct Mask {
  int width = 0, height = 0;
  std::vector<float> values;

  Mask() = default;
  Mask(int w, int h, float fill = 0.0f)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  float& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  float at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }

  size_t count_set() const {
    size_t k = 0;
    for (float v : values) k += (v > 0.5f);
    return k;
  }
};

struct EmbeddedPair {
  Image canvas;
  Mask mask;
};

inline double psnr(const Image& a, const Image& b, const Mask* region = nullptr) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("psnr: image shape mismatch");
  double se = 0.0;
  size_t count = 0;
  for (int c = 0; c < a.channels; ++c)
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        if (region && region->at(y, x) < 0.5f) continue;
        double d = a.at(c, y, x) - b.at(c, y, x);
        se += d * d;
        ++count;
      }
  if (count == 0) return 0.0;
  double mse = se / static_cast<double>(count);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace odigen
