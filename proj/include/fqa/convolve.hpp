#pragma once
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"
#include "fqa/kernel.hpp"

namespace fqa {

namespace detail {

/// "Same"-size 2D convolution core with reflect boundary, no clamping.
/// Kept linear so superposition tests can run on the raw output.
inline ImagePlane conv_same(const ImagePlane& img, const std::vector<double>& weights, int side) {
  const int half = side / 2;
  ImagePlane out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      const bool interior =
          x >= half && y >= half && x + half < img.width && y + half < img.height;
      if (interior) {
        for (int v = -half; v <= half; ++v) {
          const float* row = img.data.data() + static_cast<std::size_t>(y + v) * img.width + x;
          const double* wrow = weights.data() + static_cast<std::size_t>(v + half) * side + half;
          for (int u = -half; u <= half; ++u) acc += wrow[u] * row[u];
        }
      } else {
        for (int v = -half; v <= half; ++v) {
          const int yy = reflect_index(y + v, img.height);
          for (int u = -half; u <= half; ++u) {
            const int xx = reflect_index(x + u, img.width);
            acc += weights[static_cast<std::size_t>(v + half) * side + (u + half)] * img.at(xx, yy);
          }
        }
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace detail

/// "Same"-size convolution with reflect boundary, clamped to [0,1].
/// Implemented as cross-correlation; BlurKernel weights are centrally
/// symmetric, which makes the two identical.
inline ImagePlane convolve2d(const ImagePlane& img, const BlurKernel& kernel) {
  if (img.empty()) throw argument_error("convolve2d: empty image");
  if (kernel.side < 1 || kernel.side % 2 == 0)
    throw argument_error("convolve2d: kernel side must be odd");
  if (kernel.side > img.width || kernel.side > img.height)
    throw argument_error("convolve2d: kernel larger than image");
  if (kernel.weights.size() != static_cast<std::size_t>(kernel.side) * kernel.side)
    throw argument_error("convolve2d: weight count does not match side");
  ImagePlane out = detail::conv_same(img, kernel.weights, kernel.side);
  out.clamp01();
  return out;
}

}  // namespace fqa
