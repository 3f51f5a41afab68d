#pragma once
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/fdc.hpp"
#include "fqa/image.hpp"
#include "fqa/nets.hpp"
#include "fqa/raw_io.hpp"
#include "fqa/spectral.hpp"
#include "fqa/wavelet.hpp"

namespace fqa {

/// Fixed-length description of a patch's high-frequency content: per band
/// (LH, HL, HH) the mean absolute coefficient and variance, then the
/// axis-averaged frequency profile of each band, log1p-compressed.
/// Length = 6 + 3 * (patch/4 + 1).
inline std::vector<double> highband_features(const ImagePlane& patch) {
  const WaveletBands bands = haar_dwt(patch);
  const ImagePlane* hf[3] = {&bands.lh, &bands.hl, &bands.hh};
  std::vector<double> out;
  out.reserve(6 + 3 * (bands.lh.width / 2 + 1));
  for (const ImagePlane* b : hf) {
    double mabs = 0.0, mean = 0.0, sq = 0.0;
    for (float v : b->data) {
      mabs += std::fabs(v);
      mean += v;
      sq += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(b->size());
    mean /= n;
    out.push_back(mabs / n);
    out.push_back(sq / n - mean * mean);
  }
  for (const ImagePlane* b : hf) {
    const FrequencyProfile p = patch_profile(*b, BinKind::axis_averaged);
    for (double v : p.bins) out.push_back(std::log1p(v));
  }
  return out;
}

inline int highband_feature_count(int patch_size) {
  return 6 + 3 * (patch_size / 2 / 2 + 1);
}

/// Least-squares critic on high-band statistics; four weight layers as a
/// deliberately shallow net (it only has to capture non-semantic
/// statistics, not content).
struct WaveletDiscriminator {
  DenseNet net;
  int patch_size = 0;

  static WaveletDiscriminator make(int patch_size, int h1, int h2, int h3,
                                   std::uint64_t seed) {
    WaveletDiscriminator d;
    d.patch_size = patch_size;
    d.net = DenseNet::make({highband_feature_count(patch_size), h1, h2, h3, 1}, 0.2, seed);
    return d;
  }
};

inline double wd_score(const WaveletDiscriminator& d, const std::vector<double>& features,
                       ForwardTrace* trace = nullptr) {
  return net_forward(d.net, features, trace);
}

using FeatureBatch = std::vector<std::vector<double>>;

/// Critic objective: mean (WD(fake))^2 + mean (WD(real) - 1)^2.
inline double wd_loss_discriminator(const WaveletDiscriminator& d, const FeatureBatch& real,
                                    const FeatureBatch& fake) {
  if (real.empty() || fake.empty()) throw argument_error("wd_loss_discriminator: empty batch");
  double lr = 0.0, lf = 0.0;
  for (const auto& f : fake) {
    const double s = wd_score(d, f);
    lf += s * s;
  }
  for (const auto& r : real) {
    const double s = wd_score(d, r) - 1.0;
    lr += s * s;
  }
  return lf / fake.size() + lr / real.size();
}

/// Generator-side objective: mean (WD(fake) - 1)^2.
inline double wd_loss_generator(const WaveletDiscriminator& d, const FeatureBatch& fake) {
  if (fake.empty()) throw argument_error("wd_loss_generator: empty batch");
  double acc = 0.0;
  for (const auto& f : fake) {
    const double s = wd_score(d, f) - 1.0;
    acc += s * s;
  }
  return acc / fake.size();
}

struct WdTrainState {
  WaveletDiscriminator model;
  AdamState opt;
  int iteration = 0;

  static WdTrainState make(int patch_size, int h1, int h2, int h3, std::uint64_t seed) {
    WdTrainState st;
    st.model = WaveletDiscriminator::make(patch_size, h1, h2, h3, seed);
    st.opt = AdamState::zeros_like(st.model.net);
    return st;
  }
};

/// Critic objective and its gradient w.r.t. the critic weights.
inline double wd_loss_gradients(const WaveletDiscriminator& model, const FeatureBatch& real,
                                const FeatureBatch& fake, NetGrads& grads) {
  if (real.empty() || fake.empty()) throw argument_error("wd_loss_gradients: empty batch");
  double loss = 0.0;
  for (std::size_t i = 0; i < fake.size(); ++i) {
    ForwardTrace tr;
    const double s = wd_score(model, fake[i], &tr);
    if (!std::isfinite(s))
      throw training_error("wd: non-finite critic output", static_cast<int>(i));
    loss += s * s / fake.size();
    net_backward(model.net, tr, 2.0 * s / fake.size(), grads);
  }
  for (std::size_t i = 0; i < real.size(); ++i) {
    ForwardTrace tr;
    const double s = wd_score(model, real[i], &tr) - 1.0;
    if (!std::isfinite(s))
      throw training_error("wd: non-finite critic output", static_cast<int>(i));
    loss += s * s / real.size();
    net_backward(model.net, tr, 2.0 * s / real.size(), grads);
  }
  return loss;
}

/// One Adam step on the critic objective. Returns the pre-update loss.
inline double wd_step(WdTrainState& state, const FeatureBatch& real, const FeatureBatch& fake,
                      double lr) {
  NetGrads grads = NetGrads::zeros_like(state.model.net);
  const double loss = wd_loss_gradients(state.model, real, fake, grads);
  state.iteration += 1;
  state.opt.step(state.model.net, grads, lr);
  return loss;
}

inline void save_discriminator(std::ostream& os, const WaveletDiscriminator& d) {
  os << "FQAC 1 wd\n";
  os << "dims=";
  for (std::size_t i = 0; i < d.net.dims.size(); ++i)
    os << (i ? "," : "") << d.net.dims[i];
  os << "\n";
  os << "slope=" << d.net.leaky_slope << "\n";
  os << "patch_size=" << d.patch_size << "\n";
  os << "\n";
  const std::vector<float> flat = flatten_params(d.net);
  write_raw(os, static_cast<int>(flat.size()), 1, flat);
}

inline WaveletDiscriminator load_discriminator(std::istream& is) {
  const auto h = detail::read_checkpoint_header(is, "wd");
  WaveletDiscriminator d;
  d.net = DenseNet::make(h.dims, h.slope, 0);
  d.patch_size = h.patch_size;
  const ImagePlane blob = read_raw(is);
  unflatten_params(d.net, blob.data);
  return d;
}

}  // namespace fqa
