#pragma once
#include "fqa/convolve.hpp"
#include "fqa/kernel.hpp"
#include "fqa/resample.hpp"

namespace fqa {

/// Degradation pipeline settings: SR scale factor, discretization side of
/// the blur kernel, and the Gaussian parameters.
struct DegradationConfig {
  int scale = 4;
  int kernel_side = 13;
  KernelParams params;
};

/// LR = (HR downscaled by 1/scale) convolved with the Gaussian kernel —
/// downsample first, blur second. Inputs whose dimensions are not a
/// multiple of scale are cropped (top-left anchored) to the largest
/// multiple; callers that persist outputs record the crop in a manifest.
inline ImagePlane degrade(const ImagePlane& hr, const DegradationConfig& cfg) {
  if (cfg.scale < 1) throw argument_error("degrade: scale must be >= 1");
  const int w = hr.width - hr.width % cfg.scale;
  const int h = hr.height - hr.height % cfg.scale;
  if (w < 1 || h < 1) throw argument_error("degrade: image smaller than scale factor");
  const bool cropped = w != hr.width || h != hr.height;
  ImagePlane tmp;
  if (cropped) tmp = crop(hr, 0, 0, w, h);
  const ImagePlane& src = cropped ? tmp : hr;
  ImagePlane down = cfg.scale == 1 ? src : resample_bicubic(src, 1.0 / cfg.scale);
  if (cfg.kernel_side > down.width || cfg.kernel_side > down.height)
    throw argument_error("degrade: image smaller than kernel after downsampling");
  return convolve2d(down, gaussian_kernel(cfg.params, cfg.kernel_side));
}

}  // namespace fqa
