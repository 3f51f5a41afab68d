#pragma once
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fqa/degrade.hpp"
#include "fqa/errors.hpp"
#include "fqa/estimator.hpp"
#include "fqa/kernel.hpp"
#include "fqa/metrics.hpp"
#include "fqa/spectral.hpp"

namespace fqa {

enum class EstimatorId { direct, fca_both, fca_fdc, fca_wd, bicubic_baseline };

inline const char* estimator_name(EstimatorId e) {
  switch (e) {
    case EstimatorId::direct: return "direct";
    case EstimatorId::fca_both: return "fca-both";
    case EstimatorId::fca_fdc: return "fca-fdc";
    case EstimatorId::fca_wd: return "fca-wd";
    case EstimatorId::bicubic_baseline: return "bicubic-baseline";
  }
  return "?";
}

inline EstimatorId parse_estimator(const std::string& s) {
  if (s == "direct") return EstimatorId::direct;
  if (s == "fca-both") return EstimatorId::fca_both;
  if (s == "fca-fdc") return EstimatorId::fca_fdc;
  if (s == "fca-wd") return EstimatorId::fca_wd;
  if (s == "bicubic-baseline") return EstimatorId::bicubic_baseline;
  throw argument_error("unknown estimator: " + s);
}

/// One synthetic experiment: kernel families x seeds x estimators on a
/// shared corpus.
struct BenchmarkSuite {
  std::vector<KernelKind> kinds;
  std::vector<std::uint64_t> seeds;
  std::vector<EstimatorId> estimators;
  std::string output_dir;
  EstimatorConfig est;
  GridSpec grid;
  int truth_side = 19;
  int jobs = 1;
};

struct ScoreRow {
  KernelKind kind = KernelKind::iso1;
  EstimatorId estimator = EstimatorId::direct;
  std::uint64_t seed = 0;
  KernelParams estimated, truth;
  double kernel_err = 0.0;
  double sigma2_err = 0.0;
  double dbar_est = 0.0;
  double dbar_baseline = 0.0;
  double redeg_psnr = 0.0;
  double redeg_ssim = 0.0;
  double runtime_seconds = 0.0;
  bool failed = false;
  std::string message;
};

struct SuiteResult {
  std::vector<ScoreRow> rows;
  std::string rows_csv;     // deterministic
  std::string summary_csv;  // deterministic
  std::string timings_csv;  // wall-clock sidecar, varies run to run
  bool all_ok = true;
};

/// Axis-swap-tolerant mean absolute variance error.
inline double sigma2_error(const KernelParams& est, const KernelParams& truth) {
  auto err = [](double a, double b, double c, double d) {
    return 0.5 * (std::fabs(a - c) + std::fabs(b - d));
  };
  const double e1 = est.r1 * est.r1, e2 = est.r2 * est.r2;
  const double t1 = truth.r1 * truth.r1, t2 = truth.r2 * truth.r2;
  return std::min(err(e1, e2, t1, t2), err(e2, e1, t1, t2));
}

namespace detail {

inline std::string csv9(double v) { return fmt9(v); }

struct CellScores {
  double dbar_baseline = 0.0;
};

}  // namespace detail

/// Multi-column profile CSV for external plotting: bin index plus one
/// density column per named domain, domains in input order.
inline void emit_profile_plot_data(
    const std::vector<std::pair<std::string, std::vector<ImagePlane>>>& domains,
    const PatchSpec& patches, BinKind kind, std::ostream& os) {
  if (domains.empty()) throw argument_error("emit_profile_plot_data: no domains");
  std::vector<DomainProfile> profiles;
  for (const auto& [name, images] : domains) {
    if (images.empty())
      throw argument_error("emit_profile_plot_data: empty domain: " + name);
    profiles.push_back(detail::corpus_profile(images, patches, kind));
  }
  const std::size_t nbins = profiles.front().profile.bins.size();
  for (const auto& p : profiles)
    if (p.profile.bins.size() != nbins)
      throw argument_error("emit_profile_plot_data: profile sizes differ");
  os << "bin";
  for (const auto& [name, images] : domains) os << "," << name;
  os << "\n";
  for (std::size_t l = 0; l < nbins; ++l) {
    os << l;
    for (const auto& p : profiles) os << "," << detail::csv9(p.profile.bins[l]);
    os << "\n";
  }
}

inline void emit_profile_plot_data(
    const std::vector<std::pair<std::string, std::vector<ImagePlane>>>& domains,
    const PatchSpec& patches, BinKind kind, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  emit_profile_plot_data(domains, patches, kind, os);
  if (!os) throw io_error("write failed: " + path);
}

/// Runs every (kind, seed, estimator) cell: synthesizes the truth kernel,
/// degrades the corpus, estimates on the degraded corpus as an unlabeled
/// source domain and scores kernel recovery, frequency consistency and
/// re-degradation fidelity. Failed cells are recorded and the suite
/// continues. Cells run on suite.jobs workers; outputs are sorted before
/// serialization so results do not depend on scheduling.
inline SuiteResult run_suite(const BenchmarkSuite& suite, const std::vector<ImagePlane>& corpus) {
  if (suite.kinds.empty()) throw argument_error("run_suite: no kernel kinds");
  if (suite.seeds.empty()) throw argument_error("run_suite: no seeds");
  if (suite.estimators.empty()) throw argument_error("run_suite: no estimators");
  if (corpus.empty()) throw argument_error("run_suite: empty corpus");

  struct Cell {
    KernelKind kind;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto kind : suite.kinds)
    for (auto seed : suite.seeds) cells.push_back({kind, seed});

  std::vector<std::vector<ScoreRow>> cell_rows(cells.size());

  auto run_cell = [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    const KernelParams truth = synthesize_test_kernel(cell.kind, cell.seed);
    std::vector<ImagePlane> degraded;
    degraded.reserve(corpus.size());
    for (const auto& img : corpus)
      degraded.push_back(degrade(img, {suite.est.scale, suite.truth_side, truth}));

    std::vector<ImagePlane> bases;
    bases.reserve(degraded.size());
    for (const auto& img : degraded)
      bases.push_back(suite.est.scale == 1 ? img : resample_bicubic(img, 1.0 / suite.est.scale));

    PatchSpec patches = suite.est.patches;
    patches.seed = cell.seed;
    const DomainProfile src_profile = detail::corpus_profile(degraded, patches, suite.est.kind);

    auto dbar_for = [&](const KernelParams& p) {
      const BlurKernel k = gaussian_kernel(p, suite.est.kernel_side);
      std::vector<ImagePlane> gen;
      gen.reserve(bases.size());
      for (const auto& b : bases) gen.push_back(convolve2d(b, k));
      return freq_distance(detail::corpus_profile(gen, patches, suite.est.kind, 0x9e3779b9ULL),
                           src_profile);
    };
    const KernelParams baseline{suite.est.bounds.r_min, suite.est.bounds.r_min, 0.0};
    const double dbar_baseline = dbar_for(baseline);

    for (EstimatorId which : suite.estimators) {
      ScoreRow row;
      row.kind = cell.kind;
      row.estimator = which;
      row.seed = cell.seed;
      row.truth = truth;
      detail::Stopwatch clock;
      try {
        EstimatorConfig cfg = suite.est;
        cfg.seed = cell.seed;
        cfg.patches.seed = cell.seed;
        switch (which) {
          case EstimatorId::direct:
            row.estimated = estimate_direct(degraded, cfg.scale, suite.grid, cfg).estimated;
            break;
          case EstimatorId::fca_both:
            row.estimated = estimate_fca(degraded, cfg, AblationMode::both).estimated;
            break;
          case EstimatorId::fca_fdc:
            row.estimated = estimate_fca(degraded, cfg, AblationMode::fdc_only).estimated;
            break;
          case EstimatorId::fca_wd:
            row.estimated = estimate_fca(degraded, cfg, AblationMode::wd_only).estimated;
            break;
          case EstimatorId::bicubic_baseline:
            row.estimated = baseline;
            break;
        }
        row.kernel_err = kernel_error(row.estimated, truth, suite.truth_side);
        row.sigma2_err = sigma2_error(row.estimated, truth);
        row.dbar_est = dbar_for(row.estimated);
        row.dbar_baseline = dbar_baseline;
        double psnr_acc = 0.0, ssim_acc = 0.0;
        for (const auto& img : corpus) {
          const ImagePlane a = degrade(img, {suite.est.scale, suite.truth_side, row.estimated});
          const ImagePlane b = degrade(img, {suite.est.scale, suite.truth_side, truth});
          psnr_acc += psnr(a, b);
          ssim_acc += ssim(a, b);
        }
        row.redeg_psnr = psnr_acc / corpus.size();
        row.redeg_ssim = ssim_acc / corpus.size();
      } catch (const std::exception& e) {
        row.failed = true;
        row.message = e.what();
      }
      row.runtime_seconds = clock.seconds();
      cell_rows[ci].push_back(std::move(row));
    }
  };

  const int jobs = std::max(1, suite.jobs);
  if (jobs == 1 || cells.size() == 1) {
    for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t ci = next.fetch_add(1);
        if (ci >= cells.size()) return;
        run_cell(ci);
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(cells.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SuiteResult result;
  for (auto& rows : cell_rows)
    for (auto& r : rows) result.rows.push_back(std::move(r));
  std::sort(result.rows.begin(), result.rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    if (a.estimator != b.estimator)
      return static_cast<int>(a.estimator) < static_cast<int>(b.estimator);
    return a.seed < b.seed;
  });

  // rows.csv
  {
    std::ostringstream os;
    os << "kind,estimator,seed,r1,r2,theta,truth_r1,truth_r2,truth_theta,"
          "kernel_error,sigma2_error,dbar_est,dbar_baseline,dbar_reduction,"
          "redeg_psnr,redeg_ssim,status\n";
    for (const auto& r : result.rows) {
      os << kernel_kind_name(r.kind) << "," << estimator_name(r.estimator) << "," << r.seed
         << "," << detail::csv9(r.estimated.r1) << "," << detail::csv9(r.estimated.r2) << ","
         << detail::csv9(r.estimated.theta) << "," << detail::csv9(r.truth.r1) << ","
         << detail::csv9(r.truth.r2) << "," << detail::csv9(r.truth.theta) << ","
         << detail::csv9(r.kernel_err) << "," << detail::csv9(r.sigma2_err) << ","
         << detail::csv9(r.dbar_est) << "," << detail::csv9(r.dbar_baseline) << ","
         << detail::csv9(r.dbar_baseline - r.dbar_est) << "," << detail::csv9(r.redeg_psnr)
         << "," << detail::csv9(r.redeg_ssim) << "," << (r.failed ? "failed" : "ok") << "\n";
      if (r.failed) result.all_ok = false;
    }
    result.rows_csv = os.str();
  }

  // summary.csv: mean and population std per (kind, estimator) over the
  // non-failed cells
  {
    std::ostringstream os;
    os << "# estimator-level scores; SR-model training metrics are out of scope here\n";
    os << "kind,estimator,cells,failed,kernel_error_mean,kernel_error_std,"
          "sigma2_error_mean,sigma2_error_std,dbar_reduction_mean,"
          "redeg_psnr_mean,redeg_ssim_mean\n";
    for (auto kind : suite.kinds) {
      for (auto which : suite.estimators) {
        std::vector<const ScoreRow*> group;
        int failed = 0;
        for (const auto& r : result.rows)
          if (r.kind == kind && r.estimator == which) {
            if (r.failed) ++failed;
            else group.push_back(&r);
          }
        auto mean_of = [&](auto get) {
          double s = 0.0;
          for (auto* r : group) s += get(*r);
          return group.empty() ? 0.0 : s / group.size();
        };
        auto std_of = [&](auto get, double mean) {
          double s = 0.0;
          for (auto* r : group) {
            const double d = get(*r) - mean;
            s += d * d;
          }
          return group.empty() ? 0.0 : std::sqrt(s / group.size());
        };
        const double ke_m = mean_of([](const ScoreRow& r) { return r.kernel_err; });
        const double s2_m = mean_of([](const ScoreRow& r) { return r.sigma2_err; });
        os << kernel_kind_name(kind) << "," << estimator_name(which) << ","
           << group.size() + failed << "," << failed << "," << detail::csv9(ke_m) << ","
           << detail::csv9(std_of([](const ScoreRow& r) { return r.kernel_err; }, ke_m)) << ","
           << detail::csv9(s2_m) << ","
           << detail::csv9(std_of([](const ScoreRow& r) { return r.sigma2_err; }, s2_m)) << ","
           << detail::csv9(mean_of(
                  [](const ScoreRow& r) { return r.dbar_baseline - r.dbar_est; }))
           << "," << detail::csv9(mean_of([](const ScoreRow& r) { return r.redeg_psnr; })) << ","
           << detail::csv9(mean_of([](const ScoreRow& r) { return r.redeg_ssim; })) << "\n";
      }
    }
    result.summary_csv = os.str();
  }

  // timings sidecar (not part of the deterministic surface)
  {
    std::ostringstream os;
    os << "kind,estimator,seed,seconds\n";
    for (const auto& r : result.rows)
      os << kernel_kind_name(r.kind) << "," << estimator_name(r.estimator) << "," << r.seed
         << "," << detail::csv9(r.runtime_seconds) << "\n";
    result.timings_csv = os.str();
  }

  if (!suite.output_dir.empty()) {
    std::filesystem::create_directories(suite.output_dir);
    auto dump = [&](const std::string& name, const std::string& text) {
      const std::string path = suite.output_dir + "/" + name;
      std::ofstream os(path, std::ios::binary);
      if (!os) throw io_error("cannot open for writing: " + path);
      os << text;
    };
    dump("rows.csv", result.rows_csv);
    dump("summary.csv", result.summary_csv);
    dump("timings.csv", result.timings_csv);
  }
  return result;
}

}  // namespace fqa
