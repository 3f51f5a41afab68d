#pragma once
#include "fqa/errors.hpp"
#include "fqa/image.hpp"

namespace fqa {

/// Single-level orthonormal Haar analysis bands, each half the input
/// side. Coefficients are not clamped; the inverse transform reconstructs
/// the input to numerical precision.
struct WaveletBands {
  ImagePlane ll, lh, hl, hh;
};

/// Orthonormal Haar analysis. Odd dimensions lose their last row/column
/// before the transform. Energy is preserved:
/// sum img^2 == sum over all band coefficients^2.
inline WaveletBands haar_dwt(const ImagePlane& img) {
  const int w = img.width - img.width % 2;
  const int h = img.height - img.height % 2;
  if (w < 2 || h < 2) throw argument_error("haar_dwt: dimension below 2 pixels");
  const int bw = w / 2, bh = h / 2;
  WaveletBands out{ImagePlane(bw, bh), ImagePlane(bw, bh), ImagePlane(bw, bh),
                   ImagePlane(bw, bh)};
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const double a = img.at(2 * x, 2 * y);
      const double b = img.at(2 * x + 1, 2 * y);
      const double c = img.at(2 * x, 2 * y + 1);
      const double d = img.at(2 * x + 1, 2 * y + 1);
      out.ll.at(x, y) = static_cast<float>(0.5 * (a + b + c + d));
      out.lh.at(x, y) = static_cast<float>(0.5 * (a - b + c - d));
      out.hl.at(x, y) = static_cast<float>(0.5 * (a + b - c - d));
      out.hh.at(x, y) = static_cast<float>(0.5 * (a - b - c + d));
    }
  }
  return out;
}

/// Exact inverse of haar_dwt (unclamped).
inline ImagePlane haar_idwt(const WaveletBands& bands) {
  const int bw = bands.ll.width, bh = bands.ll.height;
  auto same = [&](const ImagePlane& p) { return p.width == bw && p.height == bh; };
  if (!same(bands.lh) || !same(bands.hl) || !same(bands.hh))
    throw argument_error("haar_idwt: band size mismatch");
  ImagePlane out(bw * 2, bh * 2);
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const double ll = bands.ll.at(x, y);
      const double lh = bands.lh.at(x, y);
      const double hl = bands.hl.at(x, y);
      const double hh = bands.hh.at(x, y);
      out.at(2 * x, 2 * y) = static_cast<float>(0.5 * (ll + lh + hl + hh));
      out.at(2 * x + 1, 2 * y) = static_cast<float>(0.5 * (ll - lh + hl - hh));
      out.at(2 * x, 2 * y + 1) = static_cast<float>(0.5 * (ll + lh - hl - hh));
      out.at(2 * x + 1, 2 * y + 1) = static_cast<float>(0.5 * (ll - lh - hl + hh));
    }
  }
  return out;
}

}  // namespace fqa
