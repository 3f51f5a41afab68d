#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/rng.hpp"

namespace fqa {

/// Small fully-connected net with a scalar output: hidden layers use a
/// leaky rectifier, the last layer is linear. Double precision with
/// hand-derived backprop so gradients can be checked against finite
/// differences tightly.
struct DenseNet {
  std::vector<int> dims;  // {in, h..., 1}
  double leaky_slope = 0.2;
  std::vector<std::vector<double>> w;  // layer l: dims[l+1] x dims[l], row-major
  std::vector<std::vector<double>> b;  // layer l: dims[l+1]

  int layers() const { return static_cast<int>(w.size()); }
  int input_size() const { return dims.front(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
  }

  /// Uniform init in +-sqrt(6/(fan_in+fan_out)), biases zero. Draw order:
  /// per layer, weights row-major, one uniform per entry.
  static DenseNet make(std::vector<int> dims, double slope, std::uint64_t seed) {
    if (dims.size() < 2 || dims.back() != 1)
      throw argument_error("DenseNet: need >= 2 dims ending in 1");
    DenseNet net;
    net.dims = std::move(dims);
    net.leaky_slope = slope;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
      const int fin = net.dims[l], fout = net.dims[l + 1];
      const double a = std::sqrt(6.0 / (fin + fout));
      std::vector<double> wl(static_cast<std::size_t>(fout) * fin);
      for (auto& x : wl) x = rng.uniform_in(-a, a);
      net.w.push_back(std::move(wl));
      net.b.emplace_back(fout, 0.0);
    }
    return net;
  }
};

/// Per-sample activations kept for the backward pass. acts[0] is the
/// input; acts[l+1] the post-activation output of layer l.
struct ForwardTrace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> pre;  // pre-activation of each layer
};

inline double net_forward(const DenseNet& net, const std::vector<double>& x,
                          ForwardTrace* trace = nullptr) {
  if (static_cast<int>(x.size()) != net.input_size())
    throw argument_error("net_forward: input size mismatch");
  std::vector<double> a = x;
  if (trace) {
    trace->acts.clear();
    trace->pre.clear();
    trace->acts.push_back(a);
  }
  const int L = net.layers();
  for (int l = 0; l < L; ++l) {
    const int fin = net.dims[l], fout = net.dims[l + 1];
    std::vector<double> z(fout);
    for (int o = 0; o < fout; ++o) {
      double acc = net.b[l][o];
      const double* row = net.w[l].data() + static_cast<std::size_t>(o) * fin;
      for (int i = 0; i < fin; ++i) acc += row[i] * a[i];
      z[o] = acc;
    }
    if (trace) trace->pre.push_back(z);
    if (l + 1 < L)
      for (auto& v : z) v = v > 0.0 ? v : net.leaky_slope * v;
    a = std::move(z);
    if (trace) trace->acts.push_back(a);
  }
  return a[0];
}

/// Gradient accumulator shaped like the net.
struct NetGrads {
  std::vector<std::vector<double>> w, b;

  static NetGrads zeros_like(const DenseNet& net) {
    NetGrads g;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      g.w.emplace_back(net.w[l].size(), 0.0);
      g.b.emplace_back(net.b[l].size(), 0.0);
    }
    return g;
  }

  void scale(double s) {
    for (auto& v : w)
      for (auto& x : v) x *= s;
    for (auto& v : b)
      for (auto& x : v) x *= s;
  }
};

/// Accumulates d(output)/d(params) * dout into grads for one traced
/// forward pass.
inline void net_backward(const DenseNet& net, const ForwardTrace& trace, double dout,
                         NetGrads& grads) {
  const int L = net.layers();
  std::vector<double> delta{dout};  // output layer is linear
  for (int l = L - 1; l >= 0; --l) {
    const int fin = net.dims[l], fout = net.dims[l + 1];
    const std::vector<double>& ain = trace.acts[l];
    for (int o = 0; o < fout; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = grads.w[l].data() + static_cast<std::size_t>(o) * fin;
      for (int i = 0; i < fin; ++i) grow[i] += d * ain[i];
      grads.b[l][o] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(fin, 0.0);
    for (int o = 0; o < fout; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = net.w[l].data() + static_cast<std::size_t>(o) * fin;
      for (int i = 0; i < fin; ++i) prev[i] += d * row[i];
    }
    // derivative of the leaky rectifier of the previous layer
    const std::vector<double>& z = trace.pre[l - 1];
    for (int i = 0; i < fin; ++i) prev[i] *= z[i] > 0.0 ? 1.0 : net.leaky_slope;
    delta = std::move(prev);
  }
}

/// Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8.
struct AdamState {
  std::vector<std::vector<double>> mw, vw, mb, vb;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState zeros_like(const DenseNet& net) {
    AdamState s;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      s.mw.emplace_back(net.w[l].size(), 0.0);
      s.vw.emplace_back(net.w[l].size(), 0.0);
      s.mb.emplace_back(net.b[l].size(), 0.0);
      s.vb.emplace_back(net.b[l].size(), 0.0);
    }
    return s;
  }

  void step(DenseNet& net, const NetGrads& grads, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(g[i])) throw training_error("non-finite gradient");
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    };
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      update(net.w[l], grads.w[l], mw[l], vw[l]);
      update(net.b[l], grads.b[l], mb[l], vb[l]);
    }
  }
};

/// Flattened parameter copy (layer weights then biases, in layer order) —
/// checkpoint payloads and gradient-check bookkeeping.
inline std::vector<float> flatten_params(const DenseNet& net) {
  std::vector<float> out;
  out.reserve(net.param_count());
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    for (double x : net.w[l]) out.push_back(static_cast<float>(x));
    for (double x : net.b[l]) out.push_back(static_cast<float>(x));
  }
  return out;
}

inline void unflatten_params(DenseNet& net, const std::vector<float>& flat) {
  if (flat.size() != net.param_count())
    throw format_error("unflatten_params: parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    for (auto& x : net.w[l]) x = flat[k++];
    for (auto& x : net.b[l]) x = flat[k++];
  }
}

}  // namespace fqa
