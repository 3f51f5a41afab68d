#pragma once
#include <algorithm>
#include <cstddef>
#include <vector>

#include "fqa/errors.hpp"

namespace fqa {

/// Single-channel raster, row-major, values nominally in [0,1].
///
/// Pixel-producing operations (loading, resampling, convolution,
/// degradation) clamp their output to [0,1]. Transform-domain planes
/// (wavelet bands) reuse this container but are not clamped, otherwise
/// perfect reconstruction would be impossible.
struct ImagePlane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  ImagePlane() = default;
  ImagePlane(int w, int h, float fill = 0.f) : width(w), height(h) {
    if (w < 1 || h < 1) throw argument_error("ImagePlane: dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(w) * h, fill);
  }

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  void clamp01() {
    for (auto& v : data) v = std::min(1.f, std::max(0.f, v));
  }

  double mean() const {
    double s = 0.0;
    for (float v : data) s += v;
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
  }
};

/// Mirror index without repeating the edge sample: ..., 2, 1, 0, 1, 2, ...
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

inline ImagePlane crop(const ImagePlane& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > img.width || y0 + h > img.height)
    throw argument_error("crop: window outside image");
  ImagePlane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

}  // namespace fqa
