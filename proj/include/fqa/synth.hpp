#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "fqa/fft.hpp"
#include "fqa/image.hpp"
#include "fqa/rng.hpp"

namespace fqa {

/// Controls for the procedural test-image generator.
struct SynthOptions {
  double alpha = 1.1;            ///< spectral slope of the amplitude envelope ~ 1/f^alpha
  double intrinsic_sigma = 0.7;  ///< mild capture blur, pixels
  double contrast = 0.16;        ///< target standard deviation of the output
  double gradient = 0.08;        ///< amplitude of a random linear illumination ramp
};

/// Random-phase field with a natural-image-like amplitude spectrum:
/// white Gaussian noise shaped by 1/f^alpha and a Gaussian optical
/// rolloff, plus a soft illumination gradient. Values in [0,1]. The
/// 1/f envelope makes the corpus approximately scale invariant, which is
/// the property the frequency-matching estimators rely on; the rolloff
/// plays the role of the capture blur every real camera adds.
inline ImagePlane make_fractal_image(int width, int height, std::uint64_t seed,
                                     const SynthOptions& opt = {}) {
  Rng rng(seed);
  std::vector<std::complex<double>> field(static_cast<std::size_t>(width) * height);
  for (auto& v : field) v = {rng.normal(), 0.0};

  std::vector<std::complex<double>> spec;
  fft2(field, spec, width, height);

  const double f0 = 1.0 / std::max(width, height);
  const double roll = 2.0 * 9.869604401089358 * opt.intrinsic_sigma * opt.intrinsic_sigma;
  for (int v = 0; v < height; ++v) {
    const double fv = static_cast<double>(v <= height / 2 ? v : v - height) / height;
    for (int u = 0; u < width; ++u) {
      const double fu = static_cast<double>(u <= width / 2 ? u : u - width) / width;
      const double f = std::sqrt(fu * fu + fv * fv);
      double env = std::pow(std::max(f, f0), -opt.alpha) * std::exp(-roll * f * f);
      if (u == 0 && v == 0) env = 0.0;  // mean handled separately
      spec[static_cast<std::size_t>(v) * width + u] *= env;
    }
  }

  std::vector<std::complex<double>> shaped;
  ifft2(spec, shaped, width, height);

  ImagePlane img(width, height);
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) mean += shaped[i].real();
  mean /= static_cast<double>(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double d = shaped[i].real() - mean;
    var += d * d;
  }
  var /= static_cast<double>(img.size());
  const double gain = var > 0.0 ? opt.contrast / std::sqrt(var) : 0.0;

  const double ang = rng.uniform_in(0.0, 2.0 * 3.14159265358979323846);
  const double gx = std::cos(ang) * opt.gradient, gy = std::sin(ang) * opt.gradient;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double ramp = gx * (static_cast<double>(x) / width - 0.5) +
                          gy * (static_cast<double>(y) / height - 0.5);
      img.at(x, y) = static_cast<float>(
          0.5 + gain * (shaped[static_cast<std::size_t>(y) * width + x].real() - mean) + ramp);
    }
  }
  img.clamp01();
  return img;
}

/// Deterministic corpus: image k uses seed base_seed + k, with per-image
/// variation of slope, rolloff and contrast so the domain is not a single
/// texture class. The slope range sits slightly above 1 — measured photo
/// spectra do, and it keeps repeated downscaling profile-neutral for this
/// corpus.
inline std::vector<ImagePlane> make_corpus(int count, int size, std::uint64_t base_seed) {
  std::vector<ImagePlane> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Rng pick(base_seed ^ (0x5bd1e995u + static_cast<std::uint64_t>(k) * 2654435761u));
    SynthOptions opt;
    opt.alpha = pick.uniform_in(1.02, 1.08);
    opt.intrinsic_sigma = pick.uniform_in(0.55, 0.85);
    opt.contrast = pick.uniform_in(0.13, 0.18);
    opt.gradient = pick.uniform_in(0.0, 0.06);
    out.push_back(make_fractal_image(size, size, base_seed + k, opt));
  }
  return out;
}

}  // namespace fqa
