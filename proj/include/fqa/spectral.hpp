#pragma once
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/fft.hpp"
#include "fqa/image.hpp"

namespace fqa {

/// How a 2D magnitude spectrum collapses to a 1D profile.
enum class BinKind {
  axis_averaged,  ///< fold conjugate halves, average rows and columns
  radial,         ///< average over annuli of integer radius
};

inline const char* bin_kind_name(BinKind k) {
  return k == BinKind::axis_averaged ? "axis-averaged" : "radial";
}

inline BinKind parse_bin_kind(const std::string& s) {
  if (s == "axis-averaged") return BinKind::axis_averaged;
  if (s == "radial") return BinKind::radial;
  throw argument_error("unknown bin kind: " + s);
}

/// Averaged spectral magnitude per non-negative frequency index.
/// bins.size() == source_size/2 + 1.
struct FrequencyProfile {
  std::vector<double> bins;
  BinKind kind = BinKind::axis_averaged;
  int source_size = 0;
};

/// Profile averaged over a whole set of patches.
struct DomainProfile {
  FrequencyProfile profile;
  int image_count = 0;
};

enum class NormalizeMode { none, unit_sum, log1p };

inline const char* normalize_mode_name(NormalizeMode m) {
  switch (m) {
    case NormalizeMode::none: return "none";
    case NormalizeMode::unit_sum: return "unit-sum";
    case NormalizeMode::log1p: return "log1p";
  }
  return "?";
}

inline NormalizeMode parse_normalize_mode(const std::string& s) {
  if (s == "none") return NormalizeMode::none;
  if (s == "unit-sum") return NormalizeMode::unit_sum;
  if (s == "log1p") return NormalizeMode::log1p;
  throw argument_error("unknown normalize mode: " + s);
}

/// |DFT| of the mean-subtracted square patch, row-major, unnormalized
/// convention (Parseval: sum |F|^2 == N^2 * sum (x - mean)^2 for an N x N
/// patch). The DC bin is zero by construction.
inline std::vector<double> fft2_magnitude(const ImagePlane& img) {
  if (img.width != img.height || img.empty())
    throw argument_error("fft2_magnitude: patch must be square");
  const int n = img.width;
  const double mean = img.mean();
  std::vector<std::complex<double>> in(img.size()), out;
  for (std::size_t i = 0; i < img.size(); ++i) in[i] = {img.data[i] - mean, 0.0};
  fft2(in, out, n, n);
  std::vector<double> mag(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) mag[i] = std::abs(out[i]);
  return mag;
}

namespace detail {

/// Per-axis magnitude profiles: out_h over horizontal frequency (bins l
/// and n-l folded, averaged over rows), out_v the transposed analogue.
inline void axis_profiles_of_magnitude(const std::vector<double>& mag, int n,
                                       std::vector<double>& out_h, std::vector<double>& out_v) {
  const int nb = n / 2 + 1;
  out_h.assign(nb, 0.0);
  out_v.assign(nb, 0.0);
  for (int l = 0; l < nb; ++l) {
    const int lm = (n - l) % n;
    double hacc = 0.0, vacc = 0.0;
    for (int v = 0; v < n; ++v) {
      hacc += 0.5 * (mag[static_cast<std::size_t>(v) * n + l] +
                     mag[static_cast<std::size_t>(v) * n + lm]);
      vacc += 0.5 * (mag[static_cast<std::size_t>(l) * n + v] +
                     mag[static_cast<std::size_t>(lm) * n + v]);
    }
    out_h[l] = hacc / n;
    out_v[l] = vacc / n;
  }
}

inline FrequencyProfile profile_of_magnitude(const std::vector<double>& mag, int n, BinKind kind) {
  const int nb = n / 2 + 1;
  FrequencyProfile p;
  p.kind = kind;
  p.source_size = n;
  p.bins.assign(nb, 0.0);
  if (kind == BinKind::axis_averaged) {
    // Mean of the two per-axis profiles so neither orientation dominates.
    std::vector<double> rowp, colp;
    axis_profiles_of_magnitude(mag, n, rowp, colp);
    for (int l = 0; l < nb; ++l) p.bins[l] = 0.5 * (rowp[l] + colp[l]);
  } else {
    // Annuli of integer radius; frequencies beyond Nyquist (grid corners)
    // are dropped.
    std::vector<double> sum(nb, 0.0);
    std::vector<int> cnt(nb, 0);
    for (int v = 0; v < n; ++v) {
      const int fv = v <= n / 2 ? v : n - v;
      for (int u = 0; u < n; ++u) {
        const int fu = u <= n / 2 ? u : n - u;
        const int r = static_cast<int>(std::lround(std::sqrt(
            static_cast<double>(fu) * fu + static_cast<double>(fv) * fv)));
        if (r >= nb) continue;
        sum[r] += mag[static_cast<std::size_t>(v) * n + u];
        cnt[r] += 1;
      }
    }
    for (int r = 0; r < nb; ++r) p.bins[r] = cnt[r] ? sum[r] / cnt[r] : 0.0;
  }
  return p;
}

}  // namespace detail

/// Profile of a single square patch.
inline FrequencyProfile patch_profile(const ImagePlane& patch, BinKind kind) {
  return detail::profile_of_magnitude(fft2_magnitude(patch), patch.width, kind);
}

/// The two orientation-resolved halves of the axis profile, kept separate.
/// The folded profile (their mean) erases anisotropy; estimation code
/// compares the halves individually.
struct AxisProfilePair {
  FrequencyProfile horizontal, vertical;
};

inline AxisProfilePair patch_profile_axes(const ImagePlane& patch) {
  const std::vector<double> mag = fft2_magnitude(patch);
  AxisProfilePair out;
  detail::axis_profiles_of_magnitude(mag, patch.width, out.horizontal.bins, out.vertical.bins);
  out.horizontal.kind = out.vertical.kind = BinKind::axis_averaged;
  out.horizontal.source_size = out.vertical.source_size = patch.width;
  return out;
}

/// Domain profile: per-bin mean over a patch set (fixed summation order,
/// so results are bitwise reproducible).
inline DomainProfile frequency_profile(const std::vector<ImagePlane>& patches, BinKind kind) {
  if (patches.empty()) throw argument_error("frequency_profile: empty patch list");
  const int n = patches.front().width;
  for (const auto& p : patches)
    if (p.width != n || p.height != n)
      throw argument_error("frequency_profile: mixed patch sizes");
  DomainProfile d;
  d.image_count = static_cast<int>(patches.size());
  d.profile = patch_profile(patches.front(), kind);
  for (std::size_t i = 1; i < patches.size(); ++i) {
    const FrequencyProfile p = patch_profile(patches[i], kind);
    for (std::size_t l = 0; l < d.profile.bins.size(); ++l) d.profile.bins[l] += p.bins[l];
  }
  for (auto& b : d.profile.bins) b /= static_cast<double>(patches.size());
  return d;
}

/// Mean absolute difference of the two profiles: (1/n) sum |a_l - b_l|.
/// A scaled L1 metric — symmetric, zero iff equal, triangle inequality.
inline double freq_distance(const FrequencyProfile& a, const FrequencyProfile& b) {
  if (a.bins.size() != b.bins.size() || a.kind != b.kind)
    throw argument_error("freq_distance: profile shape or kind mismatch");
  double acc = 0.0;
  for (std::size_t l = 0; l < a.bins.size(); ++l) acc += std::fabs(a.bins[l] - b.bins[l]);
  return acc / static_cast<double>(a.bins.size());
}

inline double freq_distance(const DomainProfile& a, const DomainProfile& b) {
  return freq_distance(a.profile, b.profile);
}

inline double profile_energy(const FrequencyProfile& p) {
  double s = 0.0;
  for (double b : p.bins) s += b;
  return s;
}

inline FrequencyProfile normalize_profile(const FrequencyProfile& p, NormalizeMode mode) {
  FrequencyProfile out = p;
  switch (mode) {
    case NormalizeMode::none:
      break;
    case NormalizeMode::unit_sum: {
      const double s = profile_energy(p);
      if (s <= 0.0) throw degenerate_input_error("normalize_profile: all-zero profile");
      for (auto& b : out.bins) b /= s;
      break;
    }
    case NormalizeMode::log1p:
      for (auto& b : out.bins) b = std::log1p(b);
      break;
  }
  return out;
}

inline DomainProfile normalize_profile(const DomainProfile& p, NormalizeMode mode) {
  DomainProfile out = p;
  out.profile = normalize_profile(p.profile, mode);
  return out;
}

/// Line-oriented text form: `# bins=<n> kind=<kind> size=<s> count=<N>`
/// header, then one bin value per line, 9 significant digits.
inline void write_profile(std::ostream& os, const DomainProfile& d) {
  os << "# bins=" << d.profile.bins.size() << " kind=" << bin_kind_name(d.profile.kind)
     << " size=" << d.profile.source_size << " count=" << d.image_count << "\n";
  char buf[64];
  for (double b : d.profile.bins) {
    std::snprintf(buf, sizeof buf, "%.9g\n", b);
    os << buf;
  }
}

inline DomainProfile read_profile(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# bins=", 0) != 0)
    throw format_error("profile: missing header");
  DomainProfile d;
  std::size_t nbins = 0;
  {
    std::istringstream hs(header.substr(1));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "bins") nbins = std::stoul(val);
      else if (key == "kind") d.profile.kind = parse_bin_kind(val);
      else if (key == "size") d.profile.source_size = std::stoi(val);
      else if (key == "count") d.image_count = std::stoi(val);
    }
  }
  d.profile.bins.reserve(nbins);
  std::string line;
  while (d.profile.bins.size() < nbins && std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    d.profile.bins.push_back(std::stod(line));
  }
  if (d.profile.bins.size() != nbins) throw format_error("profile: truncated bin list");
  return d;
}

}  // namespace fqa
