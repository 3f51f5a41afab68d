#pragma once
#include <cmath>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"

namespace fqa {

inline double mse(const ImagePlane& a, const ImagePlane& b) {
  if (a.width != b.width || a.height != b.height)
    throw argument_error("mse: image dimensions differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// 10 log10(1 / MSE) for [0,1] images, capped at 100 dB (identical images
/// report the cap instead of infinity).
inline double psnr(const ImagePlane& a, const ImagePlane& b) {
  const double m = mse(a, b);
  if (m <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / m));
}

namespace detail {

inline std::vector<double> ssim_window() {
  // 11x11 Gaussian, sigma 1.5, unit sum (1D factor; the window is separable)
  std::vector<double> w(11);
  double sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    const double d = i - 5.0;
    w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

/// Separable valid-region filtering with the SSIM window; out dims are
/// (w-10) x (h-10).
inline std::vector<double> ssim_filter(const std::vector<double>& img, int w, int h,
                                       const std::vector<double>& win) {
  const int vw = w - 10, vh = h - 10;
  std::vector<double> mid(static_cast<std::size_t>(vw) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += win[k] * img[static_cast<std::size_t>(y) * w + x + k];
      mid[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(vw) * vh);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 11; ++k) acc += win[k] * mid[static_cast<std::size_t>(y + k) * vw + x];
      out[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  return out;
}

}  // namespace detail

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), k1 = 0.01,
/// k2 = 0.03, dynamic range 1, averaged over window positions that lie
/// fully inside the image.
inline double ssim(const ImagePlane& a, const ImagePlane& b) {
  if (a.width != b.width || a.height != b.height)
    throw argument_error("ssim: image dimensions differ");
  if (a.width < 11 || a.height < 11)
    throw argument_error("ssim: image smaller than the 11x11 window");
  const int w = a.width, h = a.height;
  std::vector<double> xa(a.size()), xb(a.size()), xaa(a.size()), xbb(a.size()), xab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double va = a.data[i], vb = b.data[i];
    xa[i] = va;
    xb[i] = vb;
    xaa[i] = va * va;
    xbb[i] = vb * vb;
    xab[i] = va * vb;
  }
  const auto win = detail::ssim_window();
  const auto mua = detail::ssim_filter(xa, w, h, win);
  const auto mub = detail::ssim_filter(xb, w, h, win);
  const auto saa = detail::ssim_filter(xaa, w, h, win);
  const auto sbb = detail::ssim_filter(xbb, w, h, win);
  const auto sab = detail::ssim_filter(xab, w, h, win);

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double acc = 0.0;
  for (std::size_t i = 0; i < mua.size(); ++i) {
    const double ma = mua[i], mb = mub[i];
    const double va = saa[i] - ma * ma;
    const double vb = sbb[i] - mb * mb;
    const double cov = sab[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / static_cast<double>(mua.size());
}

}  // namespace fqa
