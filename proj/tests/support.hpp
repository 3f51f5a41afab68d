#pragma once
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fqa/image.hpp"
#include "fqa/png_io.hpp"
#include "fqa/synth.hpp"

namespace testsup {

inline std::string data_dir() { return FQA_DATA_DIR; }
inline std::string tool_path() { return FQA_TOOL_PATH; }

/// Unique scratch directory under the system temp dir, removed on scope
/// exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("fqa_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

/// The shipped mini-corpus (16 x 1024^2 grayscale PNG).
inline std::vector<fqa::ImagePlane> mini_corpus(int count = 16) {
  std::vector<fqa::ImagePlane> out;
  for (int k = 0; k < count; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "/mini_corpus/img_%02d.png", k);
    out.push_back(fqa::load_image(data_dir() + name));
  }
  return out;
}

/// Small in-memory natural-statistics images for fast unit tests.
inline std::vector<fqa::ImagePlane> small_corpus(int count, int size, std::uint64_t seed) {
  return fqa::make_corpus(count, size, seed);
}

inline std::string read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace testsup
