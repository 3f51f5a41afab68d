#pragma once
#include <cmath>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"

namespace fqa {

namespace detail {

/// Catmull-Rom kernel (bicubic with a = -0.5), support [-2, 2].
inline double catmull_rom(double u) {
  u = std::fabs(u);
  if (u < 1.0) return (1.5 * u - 2.5) * u * u + 1.0;
  if (u < 2.0) return ((-0.5 * u + 2.5) * u - 4.0) * u + 2.0;
  return 0.0;
}

struct TapSet {
  int start = 0;
  std::vector<double> w;
};

/// Filter taps for one output sample whose center lies at source
/// coordinate x. For scale < 1 the kernel is stretched by 1/scale so that
/// downscaling stays antialiased; weights are normalized to unit sum.
inline TapSet make_taps(double x, double scale) {
  const double stretch = scale < 1.0 ? scale : 1.0;
  const double radius = 2.0 / stretch;
  TapSet t;
  t.start = static_cast<int>(std::ceil(x - radius));
  const int end = static_cast<int>(std::floor(x + radius));
  t.w.resize(end - t.start + 1);
  double sum = 0.0;
  for (int i = t.start; i <= end; ++i) {
    const double w = catmull_rom((x - i) * stretch);
    t.w[i - t.start] = w;
    sum += w;
  }
  for (auto& w : t.w) w /= sum;
  return t;
}

/// One separable pass along x: rows stay, each row is resampled onto the
/// coordinates in xs. Reflect boundary against the full row.
inline std::vector<float> resample_rows(const ImagePlane& img, const std::vector<TapSet>& taps) {
  const int out_w = static_cast<int>(taps.size());
  std::vector<float> out(static_cast<std::size_t>(out_w) * img.height);
  for (int y = 0; y < img.height; ++y) {
    const float* row = img.data.data() + static_cast<std::size_t>(y) * img.width;
    for (int ox = 0; ox < out_w; ++ox) {
      const TapSet& t = taps[ox];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.w.size(); ++k)
        acc += t.w[k] * row[reflect_index(t.start + static_cast<int>(k), img.width)];
      out[static_cast<std::size_t>(y) * out_w + ox] = static_cast<float>(acc);
    }
  }
  return out;
}

inline ImagePlane resample_grid(const ImagePlane& img, const std::vector<TapSet>& xtaps,
                                const std::vector<TapSet>& ytaps) {
  const int out_w = static_cast<int>(xtaps.size());
  const int out_h = static_cast<int>(ytaps.size());
  const std::vector<float> mid = resample_rows(img, xtaps);  // img.height rows of out_w
  ImagePlane out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const TapSet& t = ytaps[oy];
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.w.size(); ++k)
        acc += t.w[k] * mid[static_cast<std::size_t>(reflect_index(
                                t.start + static_cast<int>(k), img.height)) *
                                out_w +
                            ox];
      out.at(ox, oy) = static_cast<float>(acc);
    }
  }
  out.clamp01();
  return out;
}

}  // namespace detail

/// Catmull-Rom resampling to floor(width*scale) x floor(height*scale).
/// Output pixel o samples source coordinate (o + 0.5)/scale - 0.5; at
/// scale 1.0 this is the identity exactly. Reflect boundary, output
/// clamped to [0,1].
inline ImagePlane resample_bicubic(const ImagePlane& img, double scale) {
  if (img.empty()) throw argument_error("resample_bicubic: empty image");
  if (!(scale > 0.0)) throw argument_error("resample_bicubic: scale must be > 0");
  const int out_w = static_cast<int>(std::floor(img.width * scale));
  const int out_h = static_cast<int>(std::floor(img.height * scale));
  if (out_w < 1 || out_h < 1)
    throw argument_error("resample_bicubic: output dimension would be 0");
  std::vector<detail::TapSet> xt(out_w), yt(out_h);
  for (int o = 0; o < out_w; ++o) xt[o] = detail::make_taps((o + 0.5) / scale - 0.5, scale);
  for (int o = 0; o < out_h; ++o) yt[o] = detail::make_taps((o + 0.5) / scale - 0.5, scale);
  return detail::resample_grid(img, xt, yt);
}

/// Resamples a w x h window of the rescaled image centered on source
/// coordinate (cx, cy): output pixel (i, j) samples source coordinate
/// (cx + (i - (w-1)/2)/scale, cy + (j - (h-1)/2)/scale). Equivalent to
/// cropping a patch out of resample_bicubic(img, scale) around the
/// corresponding point, but touches only the needed source region.
inline ImagePlane resample_patch(const ImagePlane& img, double scale, int w, int h,
                                 double cx, double cy) {
  if (img.empty()) throw argument_error("resample_patch: empty image");
  if (!(scale > 0.0)) throw argument_error("resample_patch: scale must be > 0");
  if (w < 1 || h < 1) throw argument_error("resample_patch: bad output size");
  std::vector<detail::TapSet> xt(w), yt(h);
  for (int i = 0; i < w; ++i)
    xt[i] = detail::make_taps(cx + (i - (w - 1) / 2.0) / scale, scale);
  for (int j = 0; j < h; ++j)
    yt[j] = detail::make_taps(cy + (j - (h - 1) / 2.0) / scale, scale);
  return detail::resample_grid(img, xt, yt);
}

}  // namespace fqa
