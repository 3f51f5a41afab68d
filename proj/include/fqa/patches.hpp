#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"
#include "fqa/rng.hpp"

namespace fqa {

/// Square-patch sampling geometry. Offsets land on the stride grid
/// {0, stride, 2*stride, ...}; stride 1 allows any placement.
struct PatchSpec {
  int size = 64;
  int stride = 1;
  int count = 8;
  std::uint64_t seed = 1;
};

inline void validate(const PatchSpec& spec, const ImagePlane& img) {
  if (spec.size < 1) throw argument_error("PatchSpec: size must be >= 1");
  if (spec.stride < 1) throw argument_error("PatchSpec: stride must be >= 1");
  if (spec.count < 1) throw argument_error("PatchSpec: count must be >= 1");
  if (spec.size > img.width || spec.size > img.height)
    throw argument_error("sample_patches: patch larger than image");
}

/// Top-left offsets of the sampled patches. Contract: one Rng seeded with
/// spec.seed; per patch the x grid index is drawn first, then y, each via
/// Rng::below(number of grid positions), and multiplied by stride.
inline std::vector<std::pair<int, int>> patch_offsets(const ImagePlane& img,
                                                      const PatchSpec& spec) {
  validate(spec, img);
  const std::uint64_t nx = static_cast<std::uint64_t>(img.width - spec.size) / spec.stride + 1;
  const std::uint64_t ny = static_cast<std::uint64_t>(img.height - spec.size) / spec.stride + 1;
  Rng rng(spec.seed);
  std::vector<std::pair<int, int>> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const int ox = static_cast<int>(rng.below(nx)) * spec.stride;
    const int oy = static_cast<int>(rng.below(ny)) * spec.stride;
    out.emplace_back(ox, oy);
  }
  return out;
}

/// Exactly spec.count square patches; deterministic for fixed (img, spec).
inline std::vector<ImagePlane> sample_patches(const ImagePlane& img, const PatchSpec& spec) {
  const auto offsets = patch_offsets(img, spec);
  std::vector<ImagePlane> out;
  out.reserve(offsets.size());
  for (const auto& [ox, oy] : offsets) out.push_back(crop(img, ox, oy, spec.size, spec.size));
  return out;
}

}  // namespace fqa
