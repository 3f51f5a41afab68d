#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"
#include "fqa/nets.hpp"
#include "fqa/patches.hpp"
#include "fqa/raw_io.hpp"
#include "fqa/resample.hpp"
#include "fqa/rng.hpp"
#include "fqa/spectral.hpp"

namespace fqa {

/// Frequency density comparator: a shared encoder E maps a normalized
/// frequency profile to a scalar embedding and C(a, b) = E(a) - E(b).
/// Antisymmetry and C(a, a) = 0 hold exactly for any weights.
struct ComparatorModel {
  DenseNet net;  // bins -> h1 -> h2 -> 1, leaky slope 0.2
  NormalizeMode normalize = NormalizeMode::log1p;

  int bins() const { return net.input_size(); }

  static ComparatorModel make(int bins, int hidden1, int hidden2, NormalizeMode norm,
                              std::uint64_t seed) {
    ComparatorModel m;
    m.net = DenseNet::make({bins, hidden1, hidden2, 1}, 0.2, seed);
    m.normalize = norm;
    return m;
  }
};

/// Scalar embedding E(p); normalization happens inside so callers always
/// pass raw profiles.
inline double comparator_embed(const ComparatorModel& m, const FrequencyProfile& p,
                               ForwardTrace* trace = nullptr) {
  if (static_cast<int>(p.bins.size()) != m.bins())
    throw argument_error("comparator: profile bin count does not match model input");
  const FrequencyProfile q = normalize_profile(p, m.normalize);
  return net_forward(m.net, q.bins, trace);
}

/// C(a, b) = E(a) - E(b).
inline double comparator_forward(const ComparatorModel& m, const FrequencyProfile& a,
                                 const FrequencyProfile& b) {
  return comparator_embed(m, a) - comparator_embed(m, b);
}

/// Up/down-sampling scale factors shrinking toward 1 as training
/// progresses, which tightens the comparator's decision boundary.
struct CurriculumSchedule {
  double start_scale = 3.5;
  double end_scale = 1.2;
  int steps = 2000;
  enum class Decay { linear, geometric } decay = Decay::linear;

  void validate() const {
    if (!(start_scale > end_scale) || !(end_scale > 1.0))
      throw argument_error("CurriculumSchedule: need start > end > 1");
    if (steps < 1) throw argument_error("CurriculumSchedule: steps must be >= 1");
  }

  double scale_at(int iteration) const {
    const double p = steps <= 1 ? 1.0
                                : std::min(1.0, std::max(0.0, static_cast<double>(iteration) /
                                                                  (steps - 1)));
    if (decay == Decay::linear) return start_scale + (end_scale - start_scale) * p;
    return start_scale * std::pow(end_scale / start_scale, p);
  }
};

/// One self-supervised training sample: profiles of a downsampled, an
/// unrelated, and an upsampled patch plus the anchor patch itself.
struct Triplet {
  FrequencyProfile down, same, up, anchor;
  bool degenerate = false;
};

/// Builds a triplet around one sampled position. The down/up variants are
/// resampled windows centered on the same source point as the anchor; the
/// "same" patch is an independent placement in the image. Draw order from
/// spec.seed: center x grid index, center y, same-patch x, same-patch y
/// (one redraw pair if it collides with the anchor). Patches with profile
/// energy below 1e-6 mark the triplet degenerate.
inline Triplet make_triplet(const ImagePlane& x, double scale, const PatchSpec& spec,
                            BinKind kind = BinKind::axis_averaged) {
  if (!(scale > 1.0)) throw argument_error("make_triplet: scale must be > 1");
  const int s = spec.size;
  if (s < 2) throw argument_error("make_triplet: patch size too small");
  const int half_down = static_cast<int>(std::ceil(0.5 * s * scale)) + 3;
  const int half_anchor = s / 2 + 1;
  const int margin = std::max(half_down, half_anchor);
  if (x.width - 2 * margin < 1 || x.height - 2 * margin < 1)
    throw argument_error("make_triplet: patch too small after resizing");

  Rng rng(spec.seed);
  const int cx = margin + static_cast<int>(rng.below(x.width - 2 * margin));
  const int cy = margin + static_cast<int>(rng.below(x.height - 2 * margin));

  const ImagePlane anchor = crop(x, cx - s / 2, cy - s / 2, s, s);
  const ImagePlane down = resample_patch(x, 1.0 / scale, s, s, cx, cy);
  const ImagePlane up = resample_patch(x, scale, s, s, cx, cy);

  int sx = static_cast<int>(rng.below(x.width - s + 1));
  int sy = static_cast<int>(rng.below(x.height - s + 1));
  if (sx == cx - s / 2 && sy == cy - s / 2) {
    sx = static_cast<int>(rng.below(x.width - s + 1));
    sy = static_cast<int>(rng.below(x.height - s + 1));
  }
  const ImagePlane same = crop(x, sx, sy, s, s);

  Triplet t;
  t.anchor = patch_profile(anchor, kind);
  t.down = patch_profile(down, kind);
  t.up = patch_profile(up, kind);
  t.same = patch_profile(same, kind);
  const double floor = 1e-6;
  t.degenerate = profile_energy(t.anchor) < floor || profile_energy(t.down) < floor ||
                 profile_energy(t.up) < floor || profile_energy(t.same) < floor;
  return t;
}

/// |c_down - 1| + |c_same| + |c_up + 1| on raw comparator outputs.
inline double fdc_loss_from_outputs(double c_down, double c_same, double c_up) {
  return std::fabs(c_down - 1.0) + std::fabs(c_same) + std::fabs(c_up + 1.0);
}

inline double fdc_train_loss(const ComparatorModel& m, const Triplet& t) {
  const double ea = comparator_embed(m, t.anchor);
  return fdc_loss_from_outputs(comparator_embed(m, t.down) - ea,
                               comparator_embed(m, t.same) - ea,
                               comparator_embed(m, t.up) - ea);
}

/// Generator-side consistency loss: wants C(g, down) = -1, C(g, anchor) = 0
/// and C(g, up) = +1, i.e. g's frequency density between the up and down
/// boundaries and equal to the anchor's.
inline double fdc_consistency_loss(const ComparatorModel& m, const FrequencyProfile& g,
                                   const FrequencyProfile& anchor, const FrequencyProfile& down,
                                   const FrequencyProfile& up) {
  const double eg = comparator_embed(m, g);
  const double c1 = eg - comparator_embed(m, down);
  const double c2 = eg - comparator_embed(m, anchor);
  const double c3 = eg - comparator_embed(m, up);
  return std::fabs(c1 + 1.0) + std::fabs(c2) + std::fabs(c3 - 1.0);
}

/// Mutable training bundle: model, optimizer moments, iteration counter
/// and the curriculum the iteration indexes into.
struct FdcTrainState {
  ComparatorModel model;
  AdamState opt;
  CurriculumSchedule schedule;
  int iteration = 0;

  static FdcTrainState make(int bins, int hidden1, int hidden2, NormalizeMode norm,
                            const CurriculumSchedule& sched, std::uint64_t seed) {
    FdcTrainState st;
    st.model = ComparatorModel::make(bins, hidden1, hidden2, norm, seed);
    st.opt = AdamState::zeros_like(st.model.net);
    st.schedule = sched;
    return st;
  }

  double current_scale() const { return schedule.scale_at(iteration); }
};

namespace detail {

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace detail

/// Mean loss over the usable (non-degenerate) triplets together with its
/// gradient w.r.t. the encoder weights, accumulated into grads. Returns
/// the number of used triplets via used_out. Throws training_error (with
/// the batch index) on a non-finite comparator output.
inline double fdc_loss_gradients(const ComparatorModel& model, const std::vector<Triplet>& batch,
                                 NetGrads& grads, int* used_out = nullptr) {
  double total = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Triplet& t = batch[i];
    if (t.degenerate) continue;
    ForwardTrace tr_d, tr_s, tr_u, tr_a;
    const double ed = comparator_embed(model, t.down, &tr_d);
    const double es = comparator_embed(model, t.same, &tr_s);
    const double eu = comparator_embed(model, t.up, &tr_u);
    const double ea = comparator_embed(model, t.anchor, &tr_a);
    if (!std::isfinite(ed) || !std::isfinite(es) || !std::isfinite(eu) || !std::isfinite(ea))
      throw training_error("fdc: non-finite comparator output", static_cast<int>(i));
    const double gd = detail::sign_of(ed - ea - 1.0);
    const double gs = detail::sign_of(es - ea);
    const double gu = detail::sign_of(eu - ea + 1.0);
    total += fdc_loss_from_outputs(ed - ea, es - ea, eu - ea);
    net_backward(model.net, tr_d, gd, grads);
    net_backward(model.net, tr_s, gs, grads);
    net_backward(model.net, tr_u, gu, grads);
    net_backward(model.net, tr_a, -(gd + gs + gu), grads);
    ++used;
  }
  if (used_out) *used_out = used;
  if (used > 0) {
    grads.scale(1.0 / used);
    total /= used;
  }
  return total;
}

/// One Adam step on the mean triplet loss. Degenerate triplets are
/// skipped; an all-degenerate batch is a no-op. Returns the mean loss
/// over the used triplets.
inline double fdc_step(FdcTrainState& state, const std::vector<Triplet>& batch, double lr) {
  if (batch.empty()) throw argument_error("fdc_step: empty batch");
  NetGrads grads = NetGrads::zeros_like(state.model.net);
  int used = 0;
  const double loss = fdc_loss_gradients(state.model, batch, grads, &used);
  state.iteration += 1;
  if (used == 0) return 0.0;
  state.opt.step(state.model.net, grads, lr);
  return loss;
}

/// Standalone curriculum training over a corpus: per iteration, one
/// triplet per batch slot from a random corpus image at the current
/// curriculum scale, then one optimizer step. Returns the smoothed loss
/// curve (one value per iteration).
struct FdcTrainOptions {
  int iterations = 2000;
  int batch = 8;
  double lr = 1e-3;
  int patch_size = 64;
  BinKind kind = BinKind::axis_averaged;
  NormalizeMode normalize = NormalizeMode::log1p;
  int hidden1 = 64;
  int hidden2 = 32;
  CurriculumSchedule schedule{3.5, 1.2, 2000, CurriculumSchedule::Decay::linear};
  std::uint64_t seed = 1;
};

inline std::vector<double> train_comparator(FdcTrainState& state,
                                            const std::vector<ImagePlane>& corpus,
                                            const FdcTrainOptions& opt) {
  if (corpus.empty()) throw argument_error("train_comparator: empty corpus");
  Rng rng(opt.seed);
  std::vector<double> curve;
  curve.reserve(opt.iterations);
  for (int t = 0; t < opt.iterations; ++t) {
    const double scale = state.current_scale();
    std::vector<Triplet> batch;
    for (int b = 0; b < opt.batch; ++b) {
      const auto& img = corpus[rng.below(corpus.size())];
      Triplet trip = make_triplet(img, scale, PatchSpec{opt.patch_size, 1, 1, rng.next_u64()},
                                  opt.kind);
      if (!trip.degenerate) batch.push_back(std::move(trip));
    }
    if (batch.empty()) {
      state.iteration += 1;
      curve.push_back(curve.empty() ? 0.0 : curve.back());
      continue;
    }
    curve.push_back(fdc_step(state, batch, opt.lr));
  }
  return curve;
}

inline FdcTrainState train_comparator(const std::vector<ImagePlane>& corpus,
                                      const FdcTrainOptions& opt,
                                      std::vector<double>* curve_out = nullptr) {
  CurriculumSchedule sched = opt.schedule;
  sched.steps = opt.iterations;
  FdcTrainState state = FdcTrainState::make(opt.patch_size / 2 + 1, opt.hidden1, opt.hidden2,
                                            opt.normalize, sched, opt.seed);
  std::vector<double> curve = train_comparator(state, corpus, opt);
  if (curve_out) *curve_out = std::move(curve);
  return state;
}

/// Fraction of evaluation triplets whose measurable sign relations hold:
/// C(down, anchor) > 0 and C(up, anchor) < 0. Degenerate triplets are
/// skipped.
inline double ordering_accuracy(const ComparatorModel& model,
                                const std::vector<ImagePlane>& images, double scale,
                                int n_triplets, int patch_size, BinKind kind,
                                std::uint64_t seed) {
  if (images.empty()) throw argument_error("ordering_accuracy: no images");
  Rng rng(seed);
  int ok = 0, used = 0;
  for (int i = 0; i < n_triplets; ++i) {
    const auto& img = images[rng.below(images.size())];
    const Triplet t =
        make_triplet(img, scale, PatchSpec{patch_size, 1, 1, rng.next_u64()}, kind);
    if (t.degenerate) continue;
    const double ea = comparator_embed(model, t.anchor);
    const double cd = comparator_embed(model, t.down) - ea;
    const double cu = comparator_embed(model, t.up) - ea;
    if (cd > 0.0 && cu < 0.0) ++ok;
    ++used;
  }
  if (used == 0) throw degenerate_input_error("ordering_accuracy: all triplets degenerate");
  return static_cast<double>(ok) / used;
}

/// Mean triplet loss over freshly sampled held-out triplets at one scale.
inline double heldout_loss(const ComparatorModel& model, const std::vector<ImagePlane>& images,
                           double scale, int n_triplets, int patch_size, BinKind kind,
                           std::uint64_t seed) {
  Rng rng(seed);
  double acc = 0.0;
  int used = 0;
  for (int i = 0; i < n_triplets; ++i) {
    const auto& img = images[rng.below(images.size())];
    const Triplet t =
        make_triplet(img, scale, PatchSpec{patch_size, 1, 1, rng.next_u64()}, kind);
    if (t.degenerate) continue;
    acc += fdc_train_loss(model, t);
    ++used;
  }
  if (used == 0) throw degenerate_input_error("heldout_loss: all triplets degenerate");
  return acc / used;
}

// --- checkpoint container -------------------------------------------------
// Text header, blank line, then the flattened parameters as an FQA1 blob
// (width = parameter count, height = 1). Format tag distinguishes model
// families; version bumps on layout changes.

inline void save_comparator(std::ostream& os, const ComparatorModel& m) {
  os << "FQAC 1 fdc\n";
  os << "dims=";
  for (std::size_t i = 0; i < m.net.dims.size(); ++i)
    os << (i ? "," : "") << m.net.dims[i];
  os << "\n";
  os << "slope=" << m.net.leaky_slope << "\n";
  os << "normalize=" << normalize_mode_name(m.normalize) << "\n";
  os << "\n";
  const std::vector<float> flat = flatten_params(m.net);
  write_raw(os, static_cast<int>(flat.size()), 1, flat);
}

namespace detail {

struct CheckpointHeader {
  std::string tag;
  std::vector<int> dims;
  double slope = 0.2;
  std::string normalize = "log1p";
  int patch_size = 0;
};

inline CheckpointHeader read_checkpoint_header(std::istream& is, const std::string& want_tag) {
  CheckpointHeader h;
  std::string line;
  if (!std::getline(is, line)) throw format_error("checkpoint: empty stream");
  std::istringstream first(line);
  std::string magic;
  int version = 0;
  first >> magic >> version >> h.tag;
  if (magic != "FQAC" || version != 1)
    throw format_error("checkpoint: bad magic/version: " + line);
  if (h.tag != want_tag)
    throw format_error("checkpoint: expected tag '" + want_tag + "', found '" + h.tag + "'");
  while (std::getline(is, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw format_error("checkpoint: bad header line: " + line);
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "dims") {
      std::istringstream ds(val);
      std::string tok;
      while (std::getline(ds, tok, ',')) h.dims.push_back(std::stoi(tok));
    } else if (key == "slope") {
      h.slope = std::stod(val);
    } else if (key == "normalize") {
      h.normalize = val;
    } else if (key == "patch_size") {
      h.patch_size = std::stoi(val);
    }
  }
  if (h.dims.size() < 2) throw format_error("checkpoint: missing dims");
  return h;
}

}  // namespace detail

inline ComparatorModel load_comparator(std::istream& is) {
  const auto h = detail::read_checkpoint_header(is, "fdc");
  ComparatorModel m;
  m.net = DenseNet::make(h.dims, h.slope, 0);
  m.normalize = parse_normalize_mode(h.normalize);
  const ImagePlane blob = read_raw(is);
  unflatten_params(m.net, blob.data);
  return m;
}

}  // namespace fqa
