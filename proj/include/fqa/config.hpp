#pragma once
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fqa/benchmark.hpp"
#include "fqa/errors.hpp"
#include "fqa/estimator.hpp"

namespace fqa {

/// Flat key=value configuration covering every tunable. Files are plain
/// text, one `key=value` per line, `#` comments; flags override file
/// values; the FREQADAPT_CONFIG environment variable names a default
/// file.
struct AppConfig {
  EstimatorConfig est;
  GridSpec grid;
  int truth_kernel_side = 19;
  HrPolicy hr_policy = HrPolicy::bicubic_2x;
  int jobs = 1;

  struct KeyDoc {
    std::string key, value, doc;
  };

  /// Applies one key=value pair; rejects unknown keys and out-of-range
  /// values naming the offending key.
  void set(const std::string& key, const std::string& value) {
    auto bad = [&](const std::string& why) {
      throw argument_error("config key '" + key + "': " + why + " (got '" + value + "')");
    };
    auto to_int = [&](int lo, int hi) {
      int v = 0;
      try {
        v = std::stoi(value);
      } catch (...) {
        bad("expected an integer");
      }
      if (v < lo || v > hi) bad("out of range [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
      return v;
    };
    auto to_double = [&](double lo, double hi) {
      double v = 0.0;
      try {
        v = std::stod(value);
      } catch (...) {
        bad("expected a number");
      }
      if (!(v >= lo && v <= hi)) bad("out of range");
      return v;
    };
    auto to_u64 = [&]() {
      try {
        return static_cast<std::uint64_t>(std::stoull(value));
      } catch (...) {
        bad("expected an unsigned integer");
      }
      return std::uint64_t{0};
    };

    if (key == "scale") est.scale = to_int(1, 16);
    else if (key == "kernel_side") {
      est.kernel_side = to_int(3, 99);
      if (est.kernel_side % 2 == 0) bad("must be odd");
    } else if (key == "truth_kernel_side") {
      truth_kernel_side = to_int(3, 99);
      if (truth_kernel_side % 2 == 0) bad("must be odd");
    } else if (key == "r_min") {
      est.bounds.r_min = to_double(1e-3, 100.0);
      grid.bounds.r_min = est.bounds.r_min;
    } else if (key == "r_max") {
      est.bounds.r_max = to_double(1e-3, 100.0);
      grid.bounds.r_max = est.bounds.r_max;
    } else if (key == "patch_size") est.patches.size = to_int(8, 4096);
    else if (key == "patches_per_image") est.patches.count = to_int(1, 10000);
    else if (key == "patch_stride") est.patches.stride = to_int(1, 4096);
    else if (key == "profile_kind") est.kind = parse_bin_kind(value);
    else if (key == "normalize") est.normalize = parse_normalize_mode(value);
    else if (key == "window") est.window = parse_window_kind(value);
    else if (key == "curriculum_start") est.curriculum.start_scale = to_double(1.0001, 64.0);
    else if (key == "curriculum_end") est.curriculum.end_scale = to_double(1.0001, 64.0);
    else if (key == "curriculum_decay") {
      if (value == "linear") est.curriculum.decay = CurriculumSchedule::Decay::linear;
      else if (value == "geometric") est.curriculum.decay = CurriculumSchedule::Decay::geometric;
      else bad("expected linear or geometric");
    } else if (key == "lambda1") est.lambda1 = to_double(0.0, 1e6);
    else if (key == "lambda2") est.lambda2 = to_double(0.0, 1e6);
    else if (key == "iterations") est.iterations = to_int(1, 10000000);
    else if (key == "images_per_step") est.images_per_step = to_int(1, 4096);
    else if (key == "fdc_hidden1") est.fdc_hidden1 = to_int(1, 65536);
    else if (key == "fdc_hidden2") est.fdc_hidden2 = to_int(1, 65536);
    else if (key == "fdc_lr") est.fdc_lr = to_double(0.0, 10.0);
    else if (key == "wd_hidden1") est.wd_hidden1 = to_int(1, 65536);
    else if (key == "wd_hidden2") est.wd_hidden2 = to_int(1, 65536);
    else if (key == "wd_hidden3") est.wd_hidden3 = to_int(1, 65536);
    else if (key == "wd_lr") est.wd_lr = to_double(0.0, 10.0);
    else if (key == "gen_lr") est.gen_lr = to_double(0.0, 100.0);
    else if (key == "gen_delta") est.gen_delta = to_double(1e-6, 1.0);
    else if (key == "fdc_warmup") est.fdc_warmup = to_int(0, 10000000);
    else if (key == "plateau_window") est.plateau_window = to_int(1, 1000000);
    else if (key == "plateau_eps") est.plateau_eps = to_double(0.0, 1.0);
    else if (key == "grid_r_steps") grid.r_steps = to_int(2, 1000);
    else if (key == "grid_theta_steps") grid.theta_steps = to_int(1, 1000);
    else if (key == "hr_policy") hr_policy = parse_hr_policy(value);
    else if (key == "seed") est.seed = to_u64();
    else if (key == "jobs") jobs = to_int(1, 1024);
    else throw argument_error("unknown config key: " + key);
  }

  /// All keys with current values — drives `--help` listings and config
  /// echo.
  std::vector<KeyDoc> describe() const {
    auto d = [](double v) { return detail::fmt9(v); };
    std::vector<KeyDoc> out = {
        {"scale", std::to_string(est.scale), "SR scale factor s"},
        {"kernel_side", std::to_string(est.kernel_side), "estimated-kernel side (odd)"},
        {"truth_kernel_side", std::to_string(truth_kernel_side),
         "benchmark truth-kernel side (odd)"},
        {"r_min", d(est.bounds.r_min), "lower radius bound, pixels"},
        {"r_max", d(est.bounds.r_max), "upper radius bound, pixels"},
        {"patch_size", std::to_string(est.patches.size), "profile patch side, pixels"},
        {"patches_per_image", std::to_string(est.patches.count), "patches sampled per image"},
        {"patch_stride", std::to_string(est.patches.stride), "patch placement grid stride"},
        {"profile_kind", bin_kind_name(est.kind), "axis-averaged | radial"},
        {"normalize", normalize_mode_name(est.normalize),
         "profile normalization fed to the comparator"},
        {"window", window_kind_name(est.window),
         "patch taper inside the estimators (hann | none)"},
        {"curriculum_start", d(est.curriculum.start_scale), "initial resampling factor"},
        {"curriculum_end", d(est.curriculum.end_scale), "final resampling factor"},
        {"curriculum_decay",
         est.curriculum.decay == CurriculumSchedule::Decay::linear ? "linear" : "geometric",
         "schedule shape"},
        {"lambda1", d(est.lambda1), "weight of the frequency consistency loss"},
        {"lambda2", d(est.lambda2), "weight of the adversarial loss"},
        {"iterations", std::to_string(est.iterations), "adaptation iterations"},
        {"images_per_step", std::to_string(est.images_per_step), "corpus images per iteration"},
        {"fdc_hidden1", std::to_string(est.fdc_hidden1), "comparator hidden width 1"},
        {"fdc_hidden2", std::to_string(est.fdc_hidden2), "comparator hidden width 2"},
        {"fdc_lr", d(est.fdc_lr), "comparator learning rate"},
        {"wd_hidden1", std::to_string(est.wd_hidden1), "critic hidden width 1"},
        {"wd_hidden2", std::to_string(est.wd_hidden2), "critic hidden width 2"},
        {"wd_hidden3", std::to_string(est.wd_hidden3), "critic hidden width 3"},
        {"wd_lr", d(est.wd_lr), "critic learning rate"},
        {"gen_lr", d(est.gen_lr), "kernel-parameter step size"},
        {"gen_delta", d(est.gen_delta), "finite-difference perturbation per coordinate"},
        {"fdc_warmup", std::to_string(est.fdc_warmup),
         "iterations before kernel updates begin"},
        {"plateau_window", std::to_string(est.plateau_window), "plateau detection window"},
        {"plateau_eps", d(est.plateau_eps), "plateau objective-change threshold"},
        {"grid_r_steps", std::to_string(grid.r_steps), "radius grid points per axis"},
        {"grid_theta_steps", std::to_string(grid.theta_steps), "angle grid points over [0,pi)"},
        {"hr_policy", hr_policy_name(hr_policy), "source | bicubic-2x"},
        {"seed", std::to_string(est.seed), "master seed"},
        {"jobs", std::to_string(jobs), "benchmark worker threads"},
    };
    return out;
  }

  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open config: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      // trim
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      line = line.substr(b, e - b + 1);
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw argument_error(path + ":" + std::to_string(lineno) + ": expected key=value");
      try {
        set(line.substr(0, eq), line.substr(eq + 1));
      } catch (const argument_error& err) {
        throw argument_error(path + ":" + std::to_string(lineno) + ": " + err.what());
      }
    }
  }
};

/// Benchmark suite description: AppConfig keys plus suite-specific ones
/// (kinds, seeds, estimators, corpus, output).
struct SuiteFile {
  BenchmarkSuite suite;
  AppConfig config;
  std::string corpus_dir;
};

inline SuiteFile parse_suite_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open suite file: " + path);
  SuiteFile out;
  std::string line;
  int lineno = 0;
  auto split_list = [](const std::string& s) {
    std::vector<std::string> items;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) items.push_back(tok);
    }
    return items;
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw argument_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "kinds") {
        for (const auto& k : split_list(value)) out.suite.kinds.push_back(parse_kernel_kind(k));
      } else if (key == "seeds") {
        for (const auto& s : split_list(value))
          out.suite.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
      } else if (key == "estimators") {
        for (const auto& s : split_list(value)) out.suite.estimators.push_back(parse_estimator(s));
      } else if (key == "corpus") {
        out.corpus_dir = value;
      } else if (key == "output") {
        out.suite.output_dir = value;
      } else {
        out.config.set(key, value);
      }
    } catch (const std::exception& err) {
      throw argument_error(path + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
  out.suite.est = out.config.est;
  out.suite.grid = out.config.grid;
  out.suite.truth_side = out.config.truth_kernel_side;
  out.suite.jobs = out.config.jobs;
  return out;
}

}  // namespace fqa
