#pragma once
#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "fqa/errors.hpp"

namespace fqa {
namespace detail {

/// Process-wide cache of FFTW plans keyed by (width, height, sign).
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so the planner
/// choice never depends on buffer addresses and any array may be passed
/// at execution time. Plan creation is serialized (FFTW requirement);
/// execution through new-array interfaces is thread-safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int w, int h, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_tuple(w, h, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(static_cast<std::size_t>(w) * h);
    std::vector<std::complex<double>> b(a.size());
    fftw_plan p = fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw argument_error("fft: could not create plan");
    plans_.emplace(key, p);
    return p;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized 2D DFT (no 1/N^2 factor on the forward transform; the
/// inverse carries 1/N^2 so that ifft(fft(x)) == x). Row-major w x h.
inline void fft2(const std::vector<std::complex<double>>& in,
                 std::vector<std::complex<double>>& out, int w, int h) {
  if (in.size() != static_cast<std::size_t>(w) * h) throw argument_error("fft2: size mismatch");
  if (&in == &out) {
    std::vector<std::complex<double>> tmp(in);
    fft2(tmp, out, w, h);
    return;
  }
  out.resize(in.size());
  fftw_plan p = detail::PlanCache::instance().get(w, h, FFTW_FORWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

inline void ifft2(const std::vector<std::complex<double>>& in,
                  std::vector<std::complex<double>>& out, int w, int h) {
  if (in.size() != static_cast<std::size_t>(w) * h) throw argument_error("ifft2: size mismatch");
  if (&in == &out) {
    std::vector<std::complex<double>> tmp(in);
    ifft2(tmp, out, w, h);
    return;
  }
  out.resize(in.size());
  fftw_plan p = detail::PlanCache::instance().get(w, h, FFTW_BACKWARD);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double norm = 1.0 / (static_cast<double>(w) * h);
  for (auto& v : out) v *= norm;
}

}  // namespace fqa
