#pragma once
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/rng.hpp"

namespace fqa {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod can return exactly 2*pi after the correction for tiny negatives
  if (t >= kTwoPi) t = 0.0;
  return t;
}

/// The three degradation parameters: horizontal and vertical standard
/// deviation in pixels and the rotation angle. Radii are std-devs; the
/// matching variances are r1^2 and r2^2.
struct KernelParams {
  double r1 = 1.0;
  double r2 = 1.0;
  double theta = 0.0;
};

/// Mean variance (r1^2 + r2^2) / 2, the scalar reported for isotropic fits.
inline double sigma2_mean(const KernelParams& p) {
  return 0.5 * (p.r1 * p.r1 + p.r2 * p.r2);
}

/// Discretized, unit-sum, centrally symmetric 2D kernel.
struct BlurKernel {
  int side = 0;
  std::vector<double> weights;  // side*side, row-major

  double at(int u, int v) const {  // offsets relative to center
    const int c = side / 2;
    return weights[static_cast<std::size_t>(v + c) * side + (u + c)];
  }
};

/// Evaluates the anisotropic Gaussian exp(-p^T Sigma^-1 p / 2) on the
/// integer offset grid and normalizes to unit sum, where
/// Sigma = R(theta) diag(r1^2, r2^2) R(theta)^T.
inline BlurKernel gaussian_kernel(const KernelParams& params, int side) {
  if (side < 3 || side % 2 == 0)
    throw argument_error("gaussian_kernel: side must be odd and >= 3");
  if (params.r1 < 1e-3 || params.r2 < 1e-3)
    throw argument_error("gaussian_kernel: radius below 1e-3 is near-singular");
  const double c = std::cos(params.theta), s = std::sin(params.theta);
  const double i1 = 1.0 / (params.r1 * params.r1);
  const double i2 = 1.0 / (params.r2 * params.r2);
  // Sigma^-1 = R diag(1/r1^2, 1/r2^2) R^T
  const double a = c * c * i1 + s * s * i2;
  const double b = c * s * (i1 - i2);
  const double d = s * s * i1 + c * c * i2;

  BlurKernel k;
  k.side = side;
  k.weights.resize(static_cast<std::size_t>(side) * side);
  const int half = side / 2;
  double sum = 0.0;
  for (int v = -half; v <= half; ++v) {
    for (int u = -half; u <= half; ++u) {
      const double q = a * u * u + 2.0 * b * u * v + d * v * v;
      const double w = std::exp(-0.5 * q);
      k.weights[static_cast<std::size_t>(v + half) * side + (u + half)] = w;
      sum += w;
    }
  }
  for (auto& w : k.weights) w /= sum;
  return k;
}

/// The synthetic benchmark taxonomy: fixed-variance isotropic kernels,
/// a ranged isotropic family and a fully anisotropic family.
enum class KernelKind { iso1, iso3, iso_range, ani };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::iso1: return "ISO.1";
    case KernelKind::iso3: return "ISO.3";
    case KernelKind::iso_range: return "ISO.range";
    case KernelKind::ani: return "ANI";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "ISO.1") return KernelKind::iso1;
  if (s == "ISO.3") return KernelKind::iso3;
  if (s == "ISO.range" || s == "ISO.[1,3]") return KernelKind::iso_range;
  if (s == "ANI" || s == "ANI.") return KernelKind::ani;
  throw argument_error("unknown kernel kind: " + s);
}

/// Draws ground-truth parameters for one benchmark cell. Variances are
/// sampled (sigma^2 of 1, 3, or uniform in [1,3]) and converted to radii
/// via r = sqrt(sigma^2). Draw order for ANI: u1, u2, theta.
inline KernelParams synthesize_test_kernel(KernelKind kind, std::uint64_t seed) {
  Rng rng(seed);
  switch (kind) {
    case KernelKind::iso1:
      return {1.0, 1.0, 0.0};
    case KernelKind::iso3:
      return {std::sqrt(3.0), std::sqrt(3.0), 0.0};
    case KernelKind::iso_range: {
      const double r = std::sqrt(rng.uniform_in(1.0, 3.0));
      return {r, r, 0.0};
    }
    case KernelKind::ani: {
      const double u1 = rng.uniform_in(1.0, 3.0);
      const double u2 = rng.uniform_in(1.0, 3.0);
      const double theta = rng.uniform_in(0.0, kTwoPi);
      return {std::sqrt(u1), std::sqrt(u2), theta};
    }
  }
  throw argument_error("synthesize_test_kernel: bad kind");
}

/// L2 distance between the discretized kernels. The (r1, r2, theta) and
/// (r2, r1, theta + pi/2) parameterizations describe the same Gaussian,
/// so both are evaluated and the smaller distance returned.
inline double kernel_error(const KernelParams& estimated, const KernelParams& truth, int side) {
  const BlurKernel kt = gaussian_kernel(truth, side);
  auto dist = [&](const KernelParams& p) {
    const BlurKernel ke = gaussian_kernel(p, side);
    double acc = 0.0;
    for (std::size_t i = 0; i < ke.weights.size(); ++i) {
      const double d = ke.weights[i] - kt.weights[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  const KernelParams swapped{estimated.r2, estimated.r1,
                             wrap_angle(estimated.theta + kTwoPi / 4.0)};
  return std::min(dist(estimated), dist(swapped));
}

/// Text manifest {r1, r2, theta, side}, 9 significant digits.
inline void write_kernel_manifest(const std::string& path, const KernelParams& p, int side) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"r1\": %.9g, \"r2\": %.9g, \"theta\": %.9g, \"side\": %d}\n",
                p.r1, p.r2, p.theta, side);
  os << buf;
  if (!os) throw io_error("write failed: " + path);
}

}  // namespace fqa
