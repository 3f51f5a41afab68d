#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fqa/convolve.hpp"
#include "fqa/degrade.hpp"
#include "fqa/errors.hpp"
#include "fqa/fdc.hpp"
#include "fqa/image.hpp"
#include "fqa/kernel.hpp"
#include "fqa/patches.hpp"
#include "fqa/png_io.hpp"
#include "fqa/resample.hpp"
#include "fqa/spectral.hpp"
#include "fqa/wd.hpp"

namespace fqa {

struct ParamBounds {
  double r_min = 0.1;
  double r_max = 3.0;

  double clamp_r(double r) const { return std::min(r_max, std::max(r_min, r)); }
};

/// Coarse search lattice over (r1, r2, theta). Radii are spaced linearly
/// over the bounds; theta covers [0, pi) — the Gaussian has period pi.
struct GridSpec {
  int r_steps = 7;
  int theta_steps = 4;
  ParamBounds bounds;
};

enum class AblationMode { both, fdc_only, wd_only };

/// Taper applied to estimator measurement patches before the DFT.
/// Reported frequency-density profiles stay unwindowed; inside the
/// estimator a Hann taper removes the leakage floor that would otherwise
/// dominate the heavily blurred top bins.
enum class WindowKind { none, hann };

inline const char* window_kind_name(WindowKind w) {
  return w == WindowKind::hann ? "hann" : "none";
}

inline WindowKind parse_window_kind(const std::string& s) {
  if (s == "hann") return WindowKind::hann;
  if (s == "none") return WindowKind::none;
  throw argument_error("unknown window kind: " + s);
}

inline const char* ablation_name(AblationMode m) {
  switch (m) {
    case AblationMode::both: return "both";
    case AblationMode::fdc_only: return "fdc-only";
    case AblationMode::wd_only: return "wd-only";
  }
  return "?";
}

inline AblationMode parse_ablation(const std::string& s) {
  if (s == "both") return AblationMode::both;
  if (s == "fdc-only") return AblationMode::fdc_only;
  if (s == "wd-only") return AblationMode::wd_only;
  throw argument_error("unknown ablation mode: " + s);
}

/// Everything the estimators can be tuned with; defaults follow the
/// shipped configuration.
struct EstimatorConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.001;
  int iterations = 2000;
  int images_per_step = 4;
  PatchSpec patches{64, 1, 8, 1};
  CurriculumSchedule curriculum{3.5, 1.2, 2000, CurriculumSchedule::Decay::linear};
  ParamBounds bounds;
  int scale = 4;
  int kernel_side = 13;
  BinKind kind = BinKind::axis_averaged;
  NormalizeMode normalize = NormalizeMode::log1p;
  int fdc_hidden1 = 64;
  int fdc_hidden2 = 32;
  double fdc_lr = 1e-3;
  int wd_hidden1 = 32;
  int wd_hidden2 = 16;
  int wd_hidden3 = 8;
  double wd_lr = 1e-3;
  double gen_lr = 0.05;
  double gen_delta = 0.02;
  int fdc_warmup = 150;
  int plateau_window = 100;
  double plateau_eps = 1e-5;
  WindowKind window = WindowKind::hann;  // estimator measurement patches only
  std::uint64_t seed = 1;

  void validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0)
      throw argument_error("EstimatorConfig: lambda weights must be >= 0");
    if (iterations < 1) throw argument_error("EstimatorConfig: iterations must be >= 1");
    if (images_per_step < 1)
      throw argument_error("EstimatorConfig: images_per_step must be >= 1");
    if (scale < 1) throw argument_error("EstimatorConfig: scale must be >= 1");
    if (kernel_side < 3 || kernel_side % 2 == 0)
      throw argument_error("EstimatorConfig: kernel_side must be odd and >= 3");
    if (!(bounds.r_min > 0.0) || !(bounds.r_max > bounds.r_min))
      throw argument_error("EstimatorConfig: bad radius bounds");
    curriculum.validate();
  }
};

struct TraceRow {
  int iter = 0;
  double l_fdc = 0.0;
  double l_wd = 0.0;
  double l_total = 0.0;
};

struct EstimationReport {
  std::string method;  // "direct" | "fca"
  AblationMode ablation = AblationMode::both;
  KernelParams estimated;
  std::vector<TraceRow> trace;
  double final_freq_distance = 0.0;
  double wall_seconds = 0.0;  // kept out of the serialized report body
  EstimatorConfig config;
  bool failed = false;
  std::string failure;
};

/// FCA divergence carrier: the partial report survives in the exception.
struct fca_diverged : training_error {
  explicit fca_diverged(const std::string& what, EstimationReport partial)
      : training_error(what), report(std::move(partial)) {}
  EstimationReport report;
};

namespace detail {

/// Domain profile over per-image patch samples. Image i uses seed
/// base.seed + salt + i so every image contributes a distinct but
/// reproducible placement stream. Images exactly the patch size
/// contribute themselves once.
inline DomainProfile corpus_profile(const std::vector<ImagePlane>& images,
                                    const PatchSpec& base, BinKind kind,
                                    std::uint64_t salt = 0) {
  if (images.empty()) throw argument_error("corpus_profile: empty corpus");
  std::vector<ImagePlane> patches;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ImagePlane& img = images[i];
    if (img.width == base.size && img.height == base.size) {
      patches.push_back(img);
      continue;
    }
    PatchSpec spec = base;
    spec.seed = base.seed + salt + i;
    auto ps = sample_patches(img, spec);
    for (auto& p : ps) patches.push_back(std::move(p));
  }
  return frequency_profile(patches, kind);
}

inline KernelParams project(const KernelParams& p, const ParamBounds& b) {
  return {b.clamp_r(p.r1), b.clamp_r(p.r2), wrap_angle(p.theta)};
}

/// Patch offsets keeping a margin away from the image border when the
/// interior is large enough (convolution boundary bands otherwise skew
/// profile comparisons). Draw order per patch: x, then y.
inline std::vector<std::pair<int, int>> interior_offsets(int width, int height, int size,
                                                         int margin, int count,
                                                         std::uint64_t seed) {
  int lo_x = margin, lo_y = margin;
  int hi_x = width - size - margin, hi_y = height - size - margin;
  if (hi_x < lo_x) {
    lo_x = 0;
    hi_x = width - size;
  }
  if (hi_y < lo_y) {
    lo_y = 0;
    hi_y = height - size;
  }
  if (hi_x < 0 || hi_y < 0)
    throw argument_error("interior_offsets: patch larger than image");
  Rng rng(seed);
  std::vector<std::pair<int, int>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int ox = lo_x + static_cast<int>(rng.below(hi_x - lo_x + 1));
    const int oy = lo_y + static_cast<int>(rng.below(hi_y - lo_y + 1));
    out.emplace_back(ox, oy);
  }
  return out;
}

inline std::vector<ImagePlane> crop_all(const ImagePlane& img,
                                        const std::vector<std::pair<int, int>>& offsets,
                                        int size) {
  std::vector<ImagePlane> out;
  out.reserve(offsets.size());
  for (const auto& [ox, oy] : offsets) out.push_back(crop(img, ox, oy, size, size));
  return out;
}

/// Deterministic half-overlapping tiling of patch placements, kept a
/// margin away from the border when the interior allows; the far edge is
/// always included so coverage reaches it.
inline std::vector<std::pair<int, int>> tiled_offsets(int width, int height, int size,
                                                      int margin) {
  auto axis = [&](int dim) {
    int lo = margin, hi = dim - size - margin;
    if (hi < lo) {
      lo = 0;
      hi = dim - size;
    }
    if (hi < 0) throw argument_error("tiled_offsets: patch larger than image");
    std::vector<int> xs;
    const int stride = std::max(1, size / 2);
    for (int x = lo; x <= hi; x += stride) xs.push_back(x);
    if (xs.back() != hi) xs.push_back(hi);
    return xs;
  };
  const std::vector<int> xs = axis(width), ys = axis(height);
  std::vector<std::pair<int, int>> out;
  out.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) out.emplace_back(x, y);
  return out;
}

/// Orientation-resolved profiles of an image, averaged over a
/// deterministic patch tiling: the horizontal and vertical marginals plus
/// the two sheared (diagonal lattice line) marginals. Row/column
/// marginals distinguish axis-aligned anisotropy but are symmetric for
/// kernels tilted 45 degrees; the sheared marginals break exactly that
/// symmetry, so the four together identify (r1, r2, theta).
struct ImageAxisProfiles {
  std::vector<double> row, col, dpos, dneg;
};

/// |DFT| of a mean-subtracted patch with an optional Hann taper.
inline std::vector<double> patch_magnitude(const ImagePlane& patch, WindowKind window) {
  if (window == WindowKind::none) return fft2_magnitude(patch);
  if (patch.width != patch.height || patch.empty())
    throw argument_error("patch_magnitude: patch must be square");
  const int n = patch.width;
  std::vector<double> win(n);
  for (int i = 0; i < n; ++i)
    win[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / (n - 1));
  const double mean = patch.mean();
  std::vector<std::complex<double>> in(patch.size()), out;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      in[static_cast<std::size_t>(y) * n + x] = {(patch.at(x, y) - mean) * win[x] * win[y], 0.0};
  fft2(in, out, n, n);
  std::vector<double> mag(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) mag[i] = std::abs(out[i]);
  return mag;
}

inline ImageAxisProfiles tiled_axis_profiles(const ImagePlane& img, int size, int margin,
                                             WindowKind window) {
  const auto offs = tiled_offsets(img.width, img.height, size, margin);
  const int n = size;
  const int nb = n / 2 + 1;
  ImageAxisProfiles out;
  out.row.assign(nb, 0.0);
  out.col.assign(nb, 0.0);
  out.dpos.assign(nb, 0.0);
  out.dneg.assign(nb, 0.0);
  std::vector<double> rowp, colp;
  for (const auto& [ox, oy] : offs) {
    const std::vector<double> mag = patch_magnitude(crop(img, ox, oy, n, n), window);
    axis_profiles_of_magnitude(mag, n, rowp, colp);
    for (int l = 0; l < nb; ++l) {
      out.row[l] += rowp[l];
      out.col[l] += colp[l];
    }
    // lines of constant (u+v) mod n and (u-v) mod n; each has n lattice
    // points, and index d folds with n-d like any DFT frequency
    for (int v = 0; v < n; ++v) {
      for (int u = 0; u < n; ++u) {
        const double m = mag[static_cast<std::size_t>(v) * n + u];
        int d1 = (u + v) % n;
        if (d1 > n / 2) d1 = n - d1;
        int d2 = (u - v + n) % n;
        if (d2 > n / 2) d2 = n - d2;
        out.dpos[d1] += m;
        out.dneg[d2] += m;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(offs.size());
  for (auto& v : out.row) v *= inv;
  for (auto& v : out.col) v *= inv;
  // sheared bins: interior indices collect two lines (d and n-d), the
  // end bins one; normalize to a per-sample mean like the axis profiles
  for (int d = 0; d < nb; ++d) {
    const int lines = (d == 0 || d == n / 2) ? 1 : 2;
    out.dpos[d] *= inv / (lines * n);
    out.dneg[d] *= inv / (lines * n);
  }
  return out;
}

/// Mean L1 distance over the four orientation marginals.
inline double axis_profile_distance(const ImageAxisProfiles& a, const ImageAxisProfiles& b) {
  if (a.row.size() != b.row.size()) throw argument_error("axis_profile_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t l = 0; l < a.row.size(); ++l) {
    acc += std::fabs(a.row[l] - b.row[l]);
    acc += std::fabs(a.col[l] - b.col[l]);
    acc += std::fabs(a.dpos[l] - b.dpos[l]);
    acc += std::fabs(a.dneg[l] - b.dneg[l]);
  }
  return 0.25 * acc / static_cast<double>(a.row.size());
}

/// Canonical orientation for averaging: r1 >= r2, theta in [0, pi).
inline KernelParams canonicalize(const KernelParams& p) {
  KernelParams q = p;
  if (q.r1 < q.r2) {
    std::swap(q.r1, q.r2);
    q.theta += kTwoPi / 4.0;
  }
  q.theta = std::fmod(wrap_angle(q.theta), kTwoPi / 2.0);
  return q;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace detail

/// Deterministic estimator: coarse grid search over (r1, r2, theta)
/// followed by coordinate descent with step halving, minimizing the mean
/// over corpus images of the frequency distance between each re-degraded
/// image and the image itself. Two identifiability measures, both
/// deterministic: patches tile each image (no sampling noise) and the two
/// per-axis profiles are compared separately — the folded profile cannot
/// tell a tilted anisotropic kernel from an isotropic one. Doubles as the
/// oracle the adversarial estimator is checked against.
inline EstimationReport estimate_direct(const std::vector<ImagePlane>& corpus, int scale,
                                        const GridSpec& grid, EstimatorConfig cfg) {
  detail::Stopwatch clock;
  cfg.scale = scale;
  cfg.validate();
  if (corpus.empty()) throw argument_error("estimate_direct: empty corpus");

  const int psize = cfg.patches.size;
  const int margin = cfg.kernel_side / 2;

  // Per-image source profiles and candidate-independent downsampled bases.
  std::vector<detail::ImageAxisProfiles> src_profiles;
  std::vector<ImagePlane> bases;
  double src_energy = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const ImagePlane& img = corpus[i];
    if (img.width < psize || img.height < psize)
      throw argument_error("estimate_direct: image smaller than profile patch");
    src_profiles.push_back(detail::tiled_axis_profiles(img, psize, margin, cfg.window));
    for (double b : src_profiles.back().row) src_energy += b;

    ImagePlane base = scale == 1 ? img : resample_bicubic(img, 1.0 / scale);
    if (cfg.kernel_side > base.width || cfg.kernel_side > base.height)
      throw argument_error("estimate_direct: image smaller than kernel after downsampling");
    if (base.width < psize || base.height < psize)
      throw argument_error("estimate_direct: downsampled image smaller than profile patch");
    bases.push_back(std::move(base));
  }
  if (src_energy / corpus.size() < 1e-6)
    throw estimation_error("estimate_direct: corpus is textureless");

  EstimationReport report;
  report.method = "direct";
  report.config = cfg;

  int evals = 0;
  auto objective = [&](const KernelParams& p) {
    const BlurKernel k = gaussian_kernel(p, cfg.kernel_side);
    double acc = 0.0;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      const ImagePlane g = convolve2d(bases[i], k);
      acc += detail::axis_profile_distance(
          detail::tiled_axis_profiles(g, psize, margin, cfg.window), src_profiles[i]);
    }
    const double d = acc / static_cast<double>(bases.size());
    report.trace.push_back({evals++, 0.0, 0.0, d});
    return d;
  };

  const ParamBounds& b = grid.bounds;
  const double r_span = b.r_max - b.r_min;
  const double r_step = grid.r_steps > 1 ? r_span / (grid.r_steps - 1) : r_span;
  const double th_step = (kTwoPi / 2.0) / grid.theta_steps;

  KernelParams best;
  double best_obj = 0.0;
  bool first = true;
  for (int i = 0; i < grid.r_steps; ++i) {
    for (int j = 0; j < grid.r_steps; ++j) {
      for (int t = 0; t < grid.theta_steps; ++t) {
        const KernelParams p{b.r_min + i * r_step, b.r_min + j * r_step, t * th_step};
        const double f = objective(p);
        // strict improvement keeps the first (lowest r1, r2, theta) on ties
        if (first || f < best_obj) {
          best = p;
          best_obj = f;
          first = false;
        }
      }
    }
  }

  // Coordinate descent: three parameters, step halving, at least three
  // sweeps. Accepted steps never increase the objective.
  double dr = r_step / 2.0, dth = th_step / 2.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool improved = false;
    for (int coord = 0; coord < 3; ++coord) {
      KernelParams cand_best = best;
      double cand_obj = best_obj;
      for (int dir : {+1, -1}) {
        KernelParams c = best;
        if (coord == 0) c.r1 = b.clamp_r(c.r1 + dir * dr);
        else if (coord == 1) c.r2 = b.clamp_r(c.r2 + dir * dr);
        else c.theta = std::fmod(wrap_angle(c.theta + dir * dth), kTwoPi / 2.0);
        if (c.r1 == best.r1 && c.r2 == best.r2 && c.theta == best.theta) continue;
        const double f = objective(c);
        if (f < cand_obj) {
          cand_obj = f;
          cand_best = c;
        }
      }
      if (cand_obj < best_obj) {
        best = cand_best;
        best_obj = cand_obj;
        improved = true;
      }
    }
    if (!improved) {
      dr /= 2.0;
      dth /= 2.0;
    }
    if (sweep >= 2 && dr < 1e-3 && dth < 2e-3) break;
  }

  report.estimated = detail::project(best, b);
  report.final_freq_distance = best_obj;
  report.wall_seconds = clock.seconds();
  return report;
}

/// Adversarial estimator: trains the comparator (curriculum) and the
/// wavelet critic on the corpus while nudging the kernel parameters down
/// the combined objective lambda1 * L_FDC + lambda2 * L_WD with central
/// finite differences over the three parameters.
inline EstimationReport estimate_fca(const std::vector<ImagePlane>& corpus,
                                     const EstimatorConfig& cfg, AblationMode ablation) {
  detail::Stopwatch clock;
  cfg.validate();
  if (corpus.empty()) throw argument_error("estimate_fca: empty corpus");

  const int ps = cfg.patches.size;
  const int bins = ps / 2 + 1;
  Rng rng(cfg.seed);

  EstimationReport report;
  report.method = "fca";
  report.ablation = ablation;
  report.config = cfg;

  const DomainProfile source = detail::corpus_profile(corpus, cfg.patches, cfg.kind);
  if (profile_energy(source.profile) < 1e-6)
    throw estimation_error("estimate_fca: corpus is textureless");

  std::vector<ImagePlane> bases;
  for (const auto& img : corpus) {
    ImagePlane base = cfg.scale == 1 ? img : resample_bicubic(img, 1.0 / cfg.scale);
    if (cfg.kernel_side > base.width || cfg.kernel_side > base.height)
      throw argument_error("estimate_fca: image smaller than kernel after downsampling");
    if (base.width < ps || base.height < ps)
      throw argument_error("estimate_fca: downsampled image smaller than profile patch");
    bases.push_back(std::move(base));
  }

  CurriculumSchedule sched = cfg.curriculum;
  sched.steps = cfg.iterations;
  FdcTrainState fdc = FdcTrainState::make(bins, cfg.fdc_hidden1, cfg.fdc_hidden2,
                                          cfg.normalize, sched, rng.next_u64());
  WdTrainState wd = WdTrainState::make(ps, cfg.wd_hidden1, cfg.wd_hidden2, cfg.wd_hidden3,
                                       rng.next_u64());

  KernelParams params{1.0, 1.0, 0.0};  // center of the tested range
  std::vector<KernelParams> tail;      // canonicalized generator iterates

  const double lam1 = ablation == AblationMode::wd_only ? 0.0 : cfg.lambda1;
  const double lam2 = ablation == AblationMode::fdc_only ? 0.0 : cfg.lambda2;

  double initial_smoothed = -1.0;
  std::vector<double> totals;

  for (int t = 0; t < cfg.iterations; ++t) {
    const double scale_t = sched.scale_at(t);

    // sample the working set for this iteration
    std::vector<std::size_t> idx(cfg.images_per_step);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(corpus.size()));

    std::vector<Triplet> triplets;
    std::vector<std::size_t> live;  // corpus indices of non-degenerate triplets
    for (std::size_t j = 0; j < idx.size(); ++j) {
      Triplet trip = make_triplet(corpus[idx[j]], scale_t,
                                  PatchSpec{ps, 1, 1, rng.next_u64()}, cfg.kind);
      if (!trip.degenerate) {
        triplets.push_back(std::move(trip));
        live.push_back(idx[j]);
      }
    }
    if (!triplets.empty()) fdc_step(fdc, triplets, cfg.fdc_lr);

    // per-iteration patch placement for generated images larger than a patch
    const int margin = cfg.kernel_side / 2;
    std::vector<std::pair<int, int>> gen_off(live.size(), {0, 0});
    for (std::size_t j = 0; j < live.size(); ++j) {
      const ImagePlane& base = bases[live[j]];
      if (base.width > ps || base.height > ps)
        gen_off[j] = detail::interior_offsets(base.width, base.height, ps, margin, 1,
                                              rng.next_u64())[0];
    }

    // objective the generator sees, with per-component readout
    struct Obj {
      double fdc = 0.0, wd = 0.0, total = 0.0;
    };
    auto gen_objective = [&](const KernelParams& p) {
      Obj o;
      if (live.empty()) return o;
      const BlurKernel k = gaussian_kernel(p, cfg.kernel_side);
      for (std::size_t j = 0; j < live.size(); ++j) {
        ImagePlane g = convolve2d(bases[live[j]], k);
        ImagePlane gp = (g.width == ps && g.height == ps)
                            ? std::move(g)
                            : crop(g, gen_off[j].first, gen_off[j].second, ps, ps);
        const FrequencyProfile gprof = patch_profile(gp, cfg.kind);
        const Triplet& trip = triplets[j];
        o.fdc += fdc_consistency_loss(fdc.model, gprof, trip.anchor, trip.down, trip.up);
        const double s = wd_score(wd.model, highband_features(gp)) - 1.0;
        o.wd += s * s;
      }
      o.fdc /= static_cast<double>(live.size());
      o.wd /= static_cast<double>(live.size());
      o.total = lam1 * o.fdc + lam2 * o.wd;
      return o;
    };

    // critic update: real patches from the corpus, fakes from the
    // current generator output
    if (!live.empty()) {
      const BlurKernel k = gaussian_kernel(params, cfg.kernel_side);
      FeatureBatch real, fake;
      for (std::size_t j = 0; j < live.size(); ++j) {
        const ImagePlane& src = corpus[live[j]];
        const auto roff =
            detail::interior_offsets(src.width, src.height, ps, margin, 1, rng.next_u64())[0];
        real.push_back(highband_features(crop(src, roff.first, roff.second, ps, ps)));
        ImagePlane g = convolve2d(bases[live[j]], k);
        ImagePlane gp = (g.width == ps && g.height == ps)
                            ? std::move(g)
                            : crop(g, gen_off[j].first, gen_off[j].second, ps, ps);
        fake.push_back(highband_features(gp));
      }
      wd_step(wd, real, fake, cfg.wd_lr);
    }

    const Obj now = gen_objective(params);
    report.trace.push_back({t, now.fdc, now.wd, now.total});
    totals.push_back(now.total);

    if (t + 1 == 10) {
      double s = 0.0;
      for (double v : totals) s += v;
      initial_smoothed = s / totals.size();
    }
    if (initial_smoothed > 0.0 && t >= 20) {
      double s = 0.0;
      for (std::size_t q = totals.size() - 10; q < totals.size(); ++q) s += totals[q];
      if (s / 10.0 > 10.0 * initial_smoothed) {
        report.estimated = detail::project(params, cfg.bounds);
        report.failed = true;
        report.failure = "objective diverged";
        report.wall_seconds = clock.seconds();
        throw fca_diverged("estimate_fca: objective exceeded 10x its initial level", report);
      }
    }

    // parameter update via central differences per coordinate
    if (t >= cfg.fdc_warmup && !live.empty() && (lam1 > 0.0 || lam2 > 0.0)) {
      double g[3] = {0.0, 0.0, 0.0};
      for (int c = 0; c < 3; ++c) {
        KernelParams hi = params, lo = params;
        if (c == 0) {
          hi.r1 = cfg.bounds.clamp_r(hi.r1 + cfg.gen_delta);
          lo.r1 = cfg.bounds.clamp_r(lo.r1 - cfg.gen_delta);
        } else if (c == 1) {
          hi.r2 = cfg.bounds.clamp_r(hi.r2 + cfg.gen_delta);
          lo.r2 = cfg.bounds.clamp_r(lo.r2 - cfg.gen_delta);
        } else {
          hi.theta = hi.theta + cfg.gen_delta;
          lo.theta = lo.theta - cfg.gen_delta;
        }
        const double span = c == 0 ? hi.r1 - lo.r1 : c == 1 ? hi.r2 - lo.r2 : hi.theta - lo.theta;
        if (span <= 0.0) continue;
        g[c] = (gen_objective(hi).total - gen_objective(lo).total) / span;
      }
      params.r1 = cfg.bounds.clamp_r(params.r1 - cfg.gen_lr * g[0]);
      params.r2 = cfg.bounds.clamp_r(params.r2 - cfg.gen_lr * g[1]);
      params.theta = wrap_angle(params.theta - cfg.gen_lr * g[2]);
      tail.push_back(detail::canonicalize(params));
    }

    // plateau detection on the smoothed objective
    const int w = cfg.plateau_window;
    if (static_cast<int>(totals.size()) >= cfg.fdc_warmup + 2 * w) {
      double recent = 0.0, older = 0.0;
      for (int q = 0; q < w; ++q) {
        recent += totals[totals.size() - 1 - q];
        older += totals[totals.size() - 1 - w - q];
      }
      if (std::fabs(recent - older) / w < cfg.plateau_eps) break;
    }
  }

  // Estimate = mean of the canonicalized tail of generator iterates;
  // theta uses the period-pi circular mean.
  if (tail.empty()) {
    report.estimated = detail::project(params, cfg.bounds);
  } else {
    const std::size_t k = std::min<std::size_t>(100, std::max<std::size_t>(1, tail.size() / 4));
    double r1 = 0.0, r2 = 0.0, cs = 0.0, sn = 0.0;
    for (std::size_t i = tail.size() - k; i < tail.size(); ++i) {
      r1 += tail[i].r1;
      r2 += tail[i].r2;
      cs += std::cos(2.0 * tail[i].theta);
      sn += std::sin(2.0 * tail[i].theta);
    }
    KernelParams est{r1 / k, r2 / k, wrap_angle(0.5 * std::atan2(sn, cs))};
    report.estimated = detail::project(est, cfg.bounds);
  }

  // Fig-8-style diagnostic: distance between the generated-LR domain and
  // the source domain under the final estimate.
  {
    const BlurKernel k = gaussian_kernel(report.estimated, cfg.kernel_side);
    std::vector<ImagePlane> gen;
    for (std::size_t i = 0; i < bases.size(); ++i) gen.push_back(convolve2d(bases[i], k));
    report.final_freq_distance =
        freq_distance(detail::corpus_profile(gen, cfg.patches, cfg.kind, 0x517cc1b7ULL), source);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- HR/LR pair generation -------------------------------------------------

enum class HrPolicy { source, bicubic_2x };

inline const char* hr_policy_name(HrPolicy p) {
  return p == HrPolicy::source ? "source" : "bicubic-2x";
}

inline HrPolicy parse_hr_policy(const std::string& s) {
  if (s == "source") return HrPolicy::source;
  if (s == "bicubic-2x") return HrPolicy::bicubic_2x;
  throw argument_error("unknown hr policy: " + s);
}

struct PairEntry {
  std::string hr_file, lr_file;
  bool cropped = false;
};

struct PairManifest {
  KernelParams params;
  int kernel_side = 13;
  int scale = 4;
  HrPolicy policy = HrPolicy::bicubic_2x;
  std::vector<PairEntry> pairs;
  std::vector<std::string> skipped;  // "name: reason"
  std::string manifest_path;
};

inline void write_pair_manifest(std::ostream& os, const PairManifest& m) {
  char buf[256];
  os << "# freqadapt pair manifest v1\n";
  std::snprintf(buf, sizeof buf, "r1=%.9g\nr2=%.9g\ntheta=%.9g\n", m.params.r1, m.params.r2,
                m.params.theta);
  os << buf << "kernel_side=" << m.kernel_side << "\nscale=" << m.scale
     << "\nhr_policy=" << hr_policy_name(m.policy) << "\n";
  for (const auto& p : m.pairs)
    os << "pair " << p.hr_file << " " << p.lr_file << (p.cropped ? " cropped" : "") << "\n";
  for (const auto& s : m.skipped) os << "skip " << s << "\n";
}

/// Degrades every input into an HR/LR pair on disk. The estimated kernel
/// is applied identically to each color channel. Inputs too small for the
/// pipeline are skipped with a manifest note. Deterministic: inputs are
/// processed in sorted order and the manifest carries no timestamps.
inline PairManifest generate_pairs(std::vector<std::string> image_paths,
                                   const KernelParams& params, int scale,
                                   const std::string& out_dir, HrPolicy policy,
                                   int kernel_side = 13) {
  std::sort(image_paths.begin(), image_paths.end());
  std::filesystem::create_directories(out_dir);
  PairManifest manifest;
  manifest.params = params;
  manifest.kernel_side = kernel_side;
  manifest.scale = scale;
  manifest.policy = policy;

  DegradationConfig cfg{scale, kernel_side, params};
  for (const auto& path : image_paths) {
    const std::string stem = std::filesystem::path(path).stem().string();
    RgbImage src;
    try {
      src = load_rgb(path);
    } catch (const std::exception& e) {
      manifest.skipped.push_back(stem + ": " + e.what());
      continue;
    }
    RgbImage hr = src;
    if (policy == HrPolicy::bicubic_2x) {
      if (src.r.width < 2 || src.r.height < 2) {
        manifest.skipped.push_back(stem + ": too small for bicubic-2x");
        continue;
      }
      hr.r = resample_bicubic(src.r, 0.5);
      if (!src.gray) {
        hr.g = resample_bicubic(src.g, 0.5);
        hr.b = resample_bicubic(src.b, 0.5);
      } else {
        hr.g = hr.r;
        hr.b = hr.r;
      }
    }
    const int w = hr.r.width - hr.r.width % scale;
    const int h = hr.r.height - hr.r.height % scale;
    const bool cropped = w != hr.r.width || h != hr.r.height;
    if (w < 1 || h < 1 || w / scale < kernel_side || h / scale < kernel_side) {
      manifest.skipped.push_back(stem + ": too small for scale and kernel");
      continue;
    }
    if (cropped) {
      hr.r = crop(hr.r, 0, 0, w, h);
      if (!src.gray) {
        hr.g = crop(hr.g, 0, 0, w, h);
        hr.b = crop(hr.b, 0, 0, w, h);
      } else {
        hr.g = hr.r;
        hr.b = hr.r;
      }
    }
    RgbImage lr;
    lr.gray = hr.gray;
    lr.r = degrade(hr.r, cfg);
    if (!hr.gray) {
      lr.g = degrade(hr.g, cfg);
      lr.b = degrade(hr.b, cfg);
    } else {
      lr.g = lr.r;
      lr.b = lr.r;
    }
    PairEntry e;
    e.hr_file = stem + "_hr.png";
    e.lr_file = stem + "_lr.png";
    e.cropped = cropped;
    save_rgb(out_dir + "/" + e.hr_file, hr);
    save_rgb(out_dir + "/" + e.lr_file, lr);
    manifest.pairs.push_back(std::move(e));
  }

  manifest.manifest_path = out_dir + "/pairs_manifest.txt";
  std::ofstream os(manifest.manifest_path);
  if (!os) throw io_error("cannot open for writing: " + manifest.manifest_path);
  write_pair_manifest(os, manifest);
  return manifest;
}

// --- frequency-consistency diagnostic ---------------------------------------

struct ConsistencyReport {
  double dbar = 0.0;
  int lr_count = 0;
  int source_count = 0;
  int patch_size = 0;
};

/// Frequency distance between a generated-LR set and the source set,
/// sampled with the same patch geometry on both sides.
inline ConsistencyReport verify_consistency(const std::vector<ImagePlane>& lr,
                                            const std::vector<ImagePlane>& source,
                                            const PatchSpec& patches, BinKind kind) {
  if (lr.empty() || source.empty())
    throw argument_error("verify_consistency: empty image set");
  for (const auto& img : lr)
    if (img.width < patches.size || img.height < patches.size)
      throw argument_error("verify_consistency: LR image smaller than patch size");
  for (const auto& img : source)
    if (img.width < patches.size || img.height < patches.size)
      throw argument_error("verify_consistency: source image smaller than patch size");
  ConsistencyReport r;
  r.lr_count = static_cast<int>(lr.size());
  r.source_count = static_cast<int>(source.size());
  r.patch_size = patches.size;
  r.dbar = freq_distance(detail::corpus_profile(lr, patches, kind, 0x2545f491ULL),
                         detail::corpus_profile(source, patches, kind));
  return r;
}

// --- report serialization ----------------------------------------------------
// Key=value sections plus a CSV loss trace. Wall-clock time is written to
// a separate sidecar by the CLI so the report file itself is byte-stable.

namespace detail {

inline std::string fmt9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

inline void write_report(std::ostream& os, const EstimationReport& r) {
  using detail::fmt9;
  const EstimatorConfig& c = r.config;
  os << "# freqadapt estimation report v1\n";
  os << "[estimate]\n";
  os << "method=" << r.method << "\n";
  if (r.method == "fca") os << "ablation=" << ablation_name(r.ablation) << "\n";
  os << "r1=" << fmt9(r.estimated.r1) << "\n";
  os << "r2=" << fmt9(r.estimated.r2) << "\n";
  os << "theta=" << fmt9(r.estimated.theta) << "\n";
  os << "sigma_x2=" << fmt9(r.estimated.r1 * r.estimated.r1) << "\n";
  os << "sigma_y2=" << fmt9(r.estimated.r2 * r.estimated.r2) << "\n";
  os << "sigma2_mean=" << fmt9(sigma2_mean(r.estimated)) << "\n";
  os << "final_freq_distance=" << fmt9(r.final_freq_distance) << "\n";
  os << "failed=" << (r.failed ? 1 : 0) << "\n";
  if (r.failed) os << "failure=" << r.failure << "\n";
  os << "[config]\n";
  os << "scale=" << c.scale << "\n";
  os << "kernel_side=" << c.kernel_side << "\n";
  os << "patch_size=" << c.patches.size << "\n";
  os << "patches_per_image=" << c.patches.count << "\n";
  os << "patch_stride=" << c.patches.stride << "\n";
  os << "profile_kind=" << bin_kind_name(c.kind) << "\n";
  os << "normalize=" << normalize_mode_name(c.normalize) << "\n";
  os << "window=" << window_kind_name(c.window) << "\n";
  os << "lambda1=" << fmt9(c.lambda1) << "\n";
  os << "lambda2=" << fmt9(c.lambda2) << "\n";
  os << "iterations=" << c.iterations << "\n";
  os << "images_per_step=" << c.images_per_step << "\n";
  os << "curriculum_start=" << fmt9(c.curriculum.start_scale) << "\n";
  os << "curriculum_end=" << fmt9(c.curriculum.end_scale) << "\n";
  os << "curriculum_decay="
     << (c.curriculum.decay == CurriculumSchedule::Decay::linear ? "linear" : "geometric")
     << "\n";
  os << "r_min=" << fmt9(c.bounds.r_min) << "\n";
  os << "r_max=" << fmt9(c.bounds.r_max) << "\n";
  os << "fdc_hidden1=" << c.fdc_hidden1 << "\n";
  os << "fdc_hidden2=" << c.fdc_hidden2 << "\n";
  os << "fdc_lr=" << fmt9(c.fdc_lr) << "\n";
  os << "wd_hidden1=" << c.wd_hidden1 << "\n";
  os << "wd_hidden2=" << c.wd_hidden2 << "\n";
  os << "wd_hidden3=" << c.wd_hidden3 << "\n";
  os << "wd_lr=" << fmt9(c.wd_lr) << "\n";
  os << "gen_lr=" << fmt9(c.gen_lr) << "\n";
  os << "gen_delta=" << fmt9(c.gen_delta) << "\n";
  os << "fdc_warmup=" << c.fdc_warmup << "\n";
  os << "plateau_window=" << c.plateau_window << "\n";
  os << "plateau_eps=" << fmt9(c.plateau_eps) << "\n";
  os << "seed=" << c.seed << "\n";
  os << "[trace]\n";
  os << "iter,l_fdc,l_wd,l_total\n";
  for (const auto& row : r.trace)
    os << row.iter << "," << fmt9(row.l_fdc) << "," << fmt9(row.l_wd) << ","
       << fmt9(row.l_total) << "\n";
}

/// Reads back the [estimate] section (enough to reuse a report for pair
/// generation); the trace is not reloaded.
inline EstimationReport read_report(std::istream& is) {
  EstimationReport r;
  std::string line, section;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      section = line;
      if (section == "[trace]") break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (section == "[estimate]") {
      if (key == "method") r.method = val;
      else if (key == "ablation") r.ablation = parse_ablation(val);
      else if (key == "r1") r.estimated.r1 = std::stod(val);
      else if (key == "r2") r.estimated.r2 = std::stod(val);
      else if (key == "theta") r.estimated.theta = std::stod(val);
      else if (key == "final_freq_distance") r.final_freq_distance = std::stod(val);
      else if (key == "failed") r.failed = val == "1";
      else if (key == "failure") r.failure = val;
    } else if (section == "[config]") {
      if (key == "scale") r.config.scale = std::stoi(val);
      else if (key == "kernel_side") r.config.kernel_side = std::stoi(val);
    }
  }
  if (r.method.empty()) throw format_error("report: missing [estimate] section");
  return r;
}

}  // namespace fqa
