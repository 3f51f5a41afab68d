// freqadapt command-line tool: kernel estimation, pair generation,
// profiles, comparator training and the synthetic benchmark driver.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fqa/benchmark.hpp"
#include "fqa/config.hpp"
#include "fqa/estimator.hpp"
#include "fqa/fdc.hpp"
#include "fqa/png_io.hpp"
#include "fqa/synth.hpp"

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> list_images(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw usage_error("--source: not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext == ".png" || ext == ".fqa1") paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw usage_error("--source: no .png or .fqa1 images in " + dir);
  return paths;
}

std::vector<fqa::ImagePlane> load_corpus(const std::string& dir) {
  std::vector<fqa::ImagePlane> out;
  for (const auto& p : list_images(dir)) out.push_back(fqa::load_image(p));
  return out;
}

fqa::AppConfig make_config(const std::string& config_file,
                           const std::vector<std::string>& sets) {
  fqa::AppConfig cfg;
  std::string path = config_file;
  if (path.empty()) {
    if (const char* env = std::getenv("FREQADAPT_CONFIG")) path = env;
  }
  if (!path.empty()) cfg.load_file(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw usage_error("--set expects key=value, got: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::string config_key_help() {
  std::string out = "Config keys (file or --set key=value):\n";
  for (const auto& kd : fqa::AppConfig{}.describe()) {
    out += "  " + kd.key;
    out.append(kd.key.size() < 18 ? 18 - kd.key.size() : 1, ' ');
    out += "default " + kd.value + "  " + kd.doc + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw fqa::io_error("cannot open for writing: " + path);
  os << text;
  if (!os) throw fqa::io_error("write failed: " + path);
}

int cmd_estimate(const std::string& source, const std::string& method,
                 const std::string& ablation, const std::string& out,
                 const fqa::AppConfig& cfg) {
  using namespace fqa;
  if (method != "direct" && method != "fca")
    throw usage_error("--method must be direct or fca");
  if (method == "direct" && !ablation.empty())
    throw usage_error("--ablation applies only to --method fca");
  const auto corpus = load_corpus(source);

  EstimationReport report;
  try {
    if (method == "direct") {
      report = estimate_direct(corpus, cfg.est.scale, cfg.grid, cfg.est);
    } else {
      const AblationMode mode = ablation.empty() ? AblationMode::both : parse_ablation(ablation);
      report = estimate_fca(corpus, cfg.est, mode);
    }
  } catch (const fca_diverged& e) {
    report = e.report;
  }

  std::ostringstream body;
  write_report(body, report);
  write_text_file(out, body.str());
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "wall_seconds=%.3f\n", report.wall_seconds);
    write_text_file(out + ".timing", buf);
  }
  const KernelParams& p = report.estimated;
  std::printf("method=%s r1=%.9g r2=%.9g theta=%.9g sigma_x2=%.9g sigma_y2=%.9g dbar=%.9g\n",
              report.method.c_str(), p.r1, p.r2, p.theta, p.r1 * p.r1, p.r2 * p.r2,
              report.final_freq_distance);
  std::printf("report=%s\n", out.c_str());
  return report.failed ? 1 : 0;
}

int cmd_generate_pairs(const std::string& source, const std::string& out_dir,
                       const std::string& report_file, double r1, double r2, double theta,
                       bool have_params, const fqa::AppConfig& cfg) {
  using namespace fqa;
  if (!report_file.empty() && have_params)
    throw usage_error("give either --report or explicit --r1/--r2/--theta, not both");
  if (report_file.empty() && !have_params)
    throw usage_error("kernel parameters required: --report FILE or --r1/--r2/--theta");

  KernelParams params;
  if (!report_file.empty()) {
    std::ifstream is(report_file);
    if (!is) throw usage_error("--report: cannot open " + report_file);
    params = read_report(is).estimated;
  } else {
    if (r1 <= 0.0 || r2 <= 0.0) throw usage_error("--r1/--r2 must be positive");
    if (theta < 0.0 || theta >= 2.0 * 3.14159265358979323846) {
      const double wrapped = wrap_angle(theta);
      std::fprintf(stderr, "warning: theta %.9g wrapped into [0,2pi) as %.9g\n", theta,
                   wrapped);
      theta = wrapped;
    }
    params = {r1, r2, theta};
  }

  const auto manifest = generate_pairs(list_images(source), params, cfg.est.scale, out_dir,
                                       cfg.hr_policy, cfg.est.kernel_side);
  std::printf("pairs=%zu skipped=%zu manifest=%s\n", manifest.pairs.size(),
              manifest.skipped.size(), manifest.manifest_path.c_str());
  return 0;
}

int cmd_profile(const std::string& source, const std::string& out, const std::string& kind,
                const std::string& normalize, const fqa::AppConfig& cfg) {
  using namespace fqa;
  const auto corpus = load_corpus(source);
  std::vector<ImagePlane> patches;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    PatchSpec spec = cfg.est.patches;
    spec.seed = cfg.est.patches.seed + i;
    if (corpus[i].width == spec.size && corpus[i].height == spec.size) {
      patches.push_back(corpus[i]);
      continue;
    }
    auto ps = sample_patches(corpus[i], spec);
    for (auto& p : ps) patches.push_back(std::move(p));
  }
  DomainProfile prof = frequency_profile(patches, parse_bin_kind(kind));
  if (normalize != "none") prof = normalize_profile(prof, parse_normalize_mode(normalize));
  std::ostringstream body;
  write_profile(body, prof);
  write_text_file(out, body.str());
  std::printf("bins=%zu count=%d profile=%s\n", prof.profile.bins.size(), prof.image_count,
              out.c_str());
  return 0;
}

int cmd_train_fdc(const std::string& source, const std::string& out,
                  const std::string& curve_file, int batch, const fqa::AppConfig& cfg) {
  using namespace fqa;
  const auto corpus = load_corpus(source);
  FdcTrainOptions opt;
  opt.iterations = cfg.est.iterations;
  opt.batch = batch;
  opt.lr = cfg.est.fdc_lr;
  opt.patch_size = cfg.est.patches.size;
  opt.kind = cfg.est.kind;
  opt.normalize = cfg.est.normalize;
  opt.hidden1 = cfg.est.fdc_hidden1;
  opt.hidden2 = cfg.est.fdc_hidden2;
  opt.schedule = cfg.est.curriculum;
  opt.seed = cfg.est.seed;

  std::vector<double> curve;
  const FdcTrainState state = train_comparator(corpus, opt, &curve);

  std::ofstream os(out, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + out);
  save_comparator(os, state.model);
  os.close();

  if (!curve_file.empty()) {
    std::ostringstream cs;
    cs << "iter,loss\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
      cs << i << "," << detail::fmt9(curve[i]) << "\n";
    write_text_file(curve_file, cs.str());
  }
  for (double sc : {1.5, 1.2}) {
    const double acc = ordering_accuracy(state.model, corpus, sc, 200, opt.patch_size,
                                         opt.kind, cfg.est.seed + 17);
    std::printf("ordering@%.1f=%.3f\n", sc, acc);
  }
  std::printf("checkpoint=%s\n", out.c_str());
  return 0;
}

int cmd_benchmark(const std::string& suite_file, const std::string& estimators,
                  bool keep_going, int jobs_override, bool plot_data,
                  const std::vector<std::string>& sets) {
  using namespace fqa;
  SuiteFile sf = parse_suite_file(suite_file);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw usage_error("--set expects key=value, got: " + kv);
    sf.config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  sf.suite.est = sf.config.est;
  sf.suite.grid = sf.config.grid;
  sf.suite.truth_side = sf.config.truth_kernel_side;
  if (!estimators.empty()) {
    sf.suite.estimators.clear();
    std::istringstream ss(estimators);
    std::string tok;
    while (std::getline(ss, tok, ',')) sf.suite.estimators.push_back(parse_estimator(tok));
  }
  if (jobs_override > 0) sf.suite.jobs = jobs_override;
  if (sf.corpus_dir.empty()) throw usage_error(suite_file + ": missing corpus= entry");
  if (sf.suite.output_dir.empty()) throw usage_error(suite_file + ": missing output= entry");

  const auto corpus = load_corpus(sf.corpus_dir);
  const SuiteResult result = run_suite(sf.suite, corpus);

  if (plot_data) {
    for (auto kind : sf.suite.kinds) {
      const KernelParams truth = synthesize_test_kernel(kind, sf.suite.seeds.front());
      std::vector<ImagePlane> degraded;
      for (const auto& img : corpus)
        degraded.push_back(degrade(img, {sf.suite.est.scale, sf.suite.truth_side, truth}));
      std::vector<std::pair<std::string, std::vector<ImagePlane>>> domains;
      domains.emplace_back("source", corpus);
      domains.emplace_back("degraded", degraded);
      emit_profile_plot_data(domains, sf.suite.est.patches, sf.suite.est.kind,
                             sf.suite.output_dir + "/profiles_" +
                                 std::string(kernel_kind_name(kind)) + ".csv");
    }
  }

  int failures = 0;
  for (const auto& row : result.rows)
    if (row.failed) ++failures;
  std::printf("cells=%zu failures=%d output=%s\n", result.rows.size(), failures,
              sf.suite.output_dir.c_str());
  if (failures > 0 && !keep_going) return 1;
  return 0;
}

int cmd_make_corpus(const std::string& out_dir, int count, int size, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto corpus = fqa::make_corpus(count, size, seed);
  for (int k = 0; k < count; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "img_%02d.png", k);
    fqa::save_image(out_dir + "/" + name, corpus[k]);
  }
  std::printf("corpus=%s count=%d size=%d seed=%llu\n", out_dir.c_str(), count, size,
              static_cast<unsigned long long>(seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freqadapt: blind blur-kernel estimation by frequency-density consistency"};
  app.require_subcommand(1);
  app.footer(config_key_help());

  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "key=value config file (or FREQADAPT_CONFIG)");
  app.add_option("--set", sets, "override one config key, e.g. --set scale=4");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate the blur kernel of an image corpus");
  std::string est_source, est_method = "direct", est_ablation, est_out = "estimate_report.txt";
  est->add_option("--source", est_source, "directory of source images")->required();
  est->add_option("--method", est_method, "direct | fca");
  est->add_option("--ablation", est_ablation, "fca loss ablation: both | fdc-only | wd-only");
  est->add_option("--out", est_out, "report file to write");

  // generate-pairs
  auto* gen = app.add_subcommand("generate-pairs", "write degraded HR/LR training pairs");
  std::string gen_source, gen_out, gen_report;
  double gen_r1 = 0, gen_r2 = 0, gen_theta = 0;
  bool gen_have_r1 = false, gen_have_r2 = false;
  std::string gen_policy;
  gen->add_option("--source", gen_source, "directory of source images")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--report", gen_report, "estimation report to take the kernel from");
  gen->add_option("--r1", gen_r1, "kernel horizontal std-dev")->each([&](const std::string&) {
    gen_have_r1 = true;
  });
  gen->add_option("--r2", gen_r2, "kernel vertical std-dev")->each([&](const std::string&) {
    gen_have_r2 = true;
  });
  gen->add_option("--theta", gen_theta, "kernel rotation, radians");
  gen->add_option("--hr-policy", gen_policy, "source | bicubic-2x");

  // profile
  auto* prof = app.add_subcommand("profile", "write the frequency-density profile of a corpus");
  std::string prof_source, prof_out = "profile.txt", prof_kind = "axis-averaged",
              prof_norm = "none";
  prof->add_option("--source", prof_source, "directory of images")->required();
  prof->add_option("--out", prof_out, "profile file to write");
  prof->add_option("--kind", prof_kind, "axis-averaged | radial");
  prof->add_option("--normalize", prof_norm, "none | unit-sum | log1p");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "run the synthetic kernel-recovery suite");
  std::string bench_suite, bench_estimators;
  bool bench_keep = false, bench_plot = false;
  int bench_jobs = 0;
  bench->add_option("--suite", bench_suite, "suite description file")->required();
  bench->add_option("--estimators", bench_estimators, "comma list overriding the suite");
  bench->add_flag("--keep-going", bench_keep, "exit 0 even when rows fail");
  bench->add_flag("--plot-data", bench_plot, "emit per-kind profile CSVs");
  bench->add_option("--jobs", bench_jobs, "worker threads for suite cells");

  // train-fdc
  auto* tf = app.add_subcommand("train-fdc", "curriculum-train the frequency comparator");
  std::string tf_source, tf_out = "fdc_checkpoint.fqac", tf_curve;
  int tf_batch = 8;
  tf->add_option("--source", tf_source, "directory of source images")->required();
  tf->add_option("--out", tf_out, "checkpoint file to write");
  tf->add_option("--curve", tf_curve, "loss curve CSV to write");
  tf->add_option("--batch", tf_batch, "triplets per optimizer step");

  // make-corpus
  auto* mc = app.add_subcommand("make-corpus", "regenerate the procedural mini-corpus");
  std::string mc_out = "data/mini_corpus";
  int mc_count = 16, mc_size = 1024;
  std::uint64_t mc_seed = 20260810ULL;
  mc->add_option("--out", mc_out, "output directory");
  mc->add_option("--count", mc_count, "number of images");
  mc->add_option("--size", mc_size, "image side, pixels");
  mc->add_option("--seed", mc_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const fqa::AppConfig cfg = make_config(config_file, sets);
    if (est->parsed())
      return cmd_estimate(est_source, est_method, est_ablation, est_out, cfg);
    if (gen->parsed()) {
      fqa::AppConfig gcfg = cfg;
      if (!gen_policy.empty()) gcfg.set("hr_policy", gen_policy);
      const bool have_params = gen_have_r1 || gen_have_r2;
      if (have_params && !(gen_have_r1 && gen_have_r2))
        throw usage_error("--r1 and --r2 must be given together");
      return cmd_generate_pairs(gen_source, gen_out, gen_report, gen_r1, gen_r2, gen_theta,
                                have_params, gcfg);
    }
    if (prof->parsed()) return cmd_profile(prof_source, prof_out, prof_kind, prof_norm, cfg);
    if (bench->parsed())
      return cmd_benchmark(bench_suite, bench_estimators, bench_keep, bench_jobs, bench_plot,
                           sets);
    if (tf->parsed()) return cmd_train_fdc(tf_source, tf_out, tf_curve, tf_batch, cfg);
    if (mc->parsed()) return cmd_make_corpus(mc_out, mc_count, mc_size, mc_seed);
  } catch (const usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const fqa::argument_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
