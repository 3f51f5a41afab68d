#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "fqa/convolve.hpp"
#include "fqa/resample.hpp"
#include "fqa/spectral.hpp"
#include "support.hpp"

using namespace fqa;

TEST_CASE("constant patches have an all-zero magnitude spectrum") {
  const ImagePlane img(32, 32, 0.77f);
  for (double m : fft2_magnitude(img)) CHECK(m < 1e-9);
}

TEST_CASE("a pure cosine concentrates in its frequency bin") {
  const int n = 64, cycles = 8;
  ImagePlane img(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      img.at(x, y) = 0.5f + 0.4f * std::cos(2.0 * 3.14159265358979 * cycles * x / n);

  const auto mag = fft2_magnitude(img);
  // energy sits in (u = +-8, v = 0)
  const double peak = mag[cycles];
  for (int u = 0; u <= n / 2; ++u)
    if (u != cycles) CHECK(mag[u] < peak * 1e-6 + 1e-9);

  const FrequencyProfile prof = patch_profile(img, BinKind::axis_averaged);
  for (std::size_t l = 0; l < prof.bins.size(); ++l)
    if (l != cycles) CHECK(prof.bins[l] < prof.bins[cycles]);
}

TEST_CASE("Parseval holds under the unnormalized convention") {
  const ImagePlane img = make_fractal_image(48, 48, 17);
  const double mean = img.mean();
  double spatial = 0.0;
  for (float v : img.data) {
    const double d = v - mean;
    spatial += d * d;
  }
  double spectral = 0.0;
  for (double m : fft2_magnitude(img)) spectral += m * m;
  CHECK(spectral == Catch::Approx(48.0 * 48.0 * spatial).epsilon(1e-9));
}

TEST_CASE("fft2_magnitude requires square patches") {
  CHECK_THROWS_AS(fft2_magnitude(ImagePlane(8, 9, 0.f)), argument_error);
}

TEST_CASE("profiles are deterministic") {
  const auto corpus = testsup::small_corpus(3, 96, 100);
  std::vector<ImagePlane> patches;
  for (const auto& img : corpus) patches.push_back(crop(img, 10, 12, 64, 64));
  const DomainProfile a = frequency_profile(patches, BinKind::axis_averaged);
  const DomainProfile b = frequency_profile(patches, BinKind::axis_averaged);
  REQUIRE(a.profile.bins.size() == 33);
  CHECK(a.image_count == 3);
  for (std::size_t l = 0; l < a.profile.bins.size(); ++l)
    CHECK(a.profile.bins[l] == b.profile.bins[l]);
}

TEST_CASE("wide blur lowers every profile bin above the crossover") {
  // measured crossover 0 over 20 corpus patches; asserted from bin 2 with margin
  const auto corpus = testsup::small_corpus(5, 256, 2024);
  const BlurKernel k = gaussian_kernel({2.0, 2.0, 0.0}, 19);
  for (int i = 0; i < 20; ++i) {
    const ImagePlane& img = corpus[i % corpus.size()];
    const int ox = 20 + 7 * i, oy = 30 + 5 * i;
    const FrequencyProfile clean = patch_profile(crop(img, ox, oy, 64, 64), BinKind::axis_averaged);
    const FrequencyProfile blurred =
        patch_profile(crop(convolve2d(img, k), ox, oy, 64, 64), BinKind::axis_averaged);
    for (std::size_t l = 2; l < clean.bins.size(); ++l) CHECK(blurred.bins[l] <= clean.bins[l]);
  }
}

TEST_CASE("frequency distance satisfies the stated examples and metric axioms") {
  FrequencyProfile a, b;
  a.bins = {1.0, 2.0, 3.0};
  b.bins = {1.0, 1.0, 1.0};
  a.source_size = b.source_size = 4;
  CHECK(freq_distance(a, b) == Catch::Approx(1.0));
  CHECK(freq_distance(a, a) == 0.0);
  CHECK(freq_distance(a, b) == freq_distance(b, a));

  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    FrequencyProfile x = a, y = a, z = a;
    for (auto* p : {&x, &y, &z})
      for (auto& v : p->bins) v = rng.uniform() * 5.0;
    CHECK(freq_distance(x, z) <= freq_distance(x, y) + freq_distance(y, z) + 1e-12);
  }

  FrequencyProfile c;
  c.bins = {1.0, 2.0};
  CHECK_THROWS_AS(freq_distance(a, c), argument_error);
  FrequencyProfile d = a;
  d.kind = BinKind::radial;
  CHECK_THROWS_AS(freq_distance(a, d), argument_error);
}

TEST_CASE("profile aggregation argument contracts") {
  CHECK_THROWS_AS(frequency_profile({}, BinKind::axis_averaged), argument_error);
  std::vector<ImagePlane> mixed{ImagePlane(16, 16, 0.5f), ImagePlane(32, 32, 0.5f)};
  CHECK_THROWS_AS(frequency_profile(mixed, BinKind::axis_averaged), argument_error);
}

TEST_CASE("normalization modes") {
  DomainProfile p;
  p.image_count = 1;
  p.profile.bins = {2.0, 2.0};
  p.profile.source_size = 2;

  const DomainProfile same = normalize_profile(p, NormalizeMode::none);
  CHECK(same.profile.bins == p.profile.bins);

  const DomainProfile unit = normalize_profile(p, NormalizeMode::unit_sum);
  CHECK(unit.profile.bins[0] == Catch::Approx(0.5));
  CHECK(unit.profile.bins[1] == Catch::Approx(0.5));

  DomainProfile e;
  e.image_count = 1;
  e.profile.bins = {0.0, std::exp(1.0) - 1.0};
  const DomainProfile logd = normalize_profile(e, NormalizeMode::log1p);
  CHECK(logd.profile.bins[0] == Catch::Approx(0.0));
  CHECK(logd.profile.bins[1] == Catch::Approx(1.0));

  DomainProfile zero;
  zero.profile.bins = {0.0, 0.0};
  CHECK_THROWS_AS(normalize_profile(zero, NormalizeMode::unit_sum), degenerate_input_error);
}

TEST_CASE("profile text serialization round trips") {
  DomainProfile p;
  p.image_count = 7;
  p.profile.kind = BinKind::radial;
  p.profile.source_size = 32;
  p.profile.bins = {1.25, 0.0, 3.5e-4, 12.125};
  std::ostringstream os;
  write_profile(os, p);
  const std::string text = os.str();
  CHECK(text.rfind("# bins=4 kind=radial size=32 count=7", 0) == 0);

  std::istringstream is(text);
  const DomainProfile back = read_profile(is);
  CHECK(back.image_count == 7);
  CHECK(back.profile.kind == BinKind::radial);
  CHECK(back.profile.source_size == 32);
  REQUIRE(back.profile.bins.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(back.profile.bins[i] == Catch::Approx(p.profile.bins[i]).epsilon(1e-8));
}

TEST_CASE("monotone blur ordering of domain distances") {
  const auto corpus = testsup::small_corpus(8, 512, 606);
  std::vector<ImagePlane> patches;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto ps = sample_patches(corpus[i], {64, 1, 4, 40 + i});
    for (auto& p : ps) patches.push_back(std::move(p));
  }
  const DomainProfile src = frequency_profile(patches, BinKind::axis_averaged);

  double prev = -1.0;
  for (double s2 : {0.5, 1.0, 2.0, 3.0}) {
    const BlurKernel k = gaussian_kernel({std::sqrt(s2), std::sqrt(s2), 0.0}, 19);
    std::vector<ImagePlane> bpatches;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const ImagePlane blurred = convolve2d(corpus[i], k);
      auto ps = sample_patches(blurred, {64, 1, 4, 40 + i});
      for (auto& p : ps) bpatches.push_back(std::move(p));
    }
    const double d = freq_distance(frequency_profile(bpatches, BinKind::axis_averaged), src);
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("resampling direction moves the upper-half profile as expected") {
  const auto corpus = testsup::small_corpus(8, 512, 707);
  PatchSpec spec{64, 1, 4, 3};
  auto domain_profile = [&](const std::vector<ImagePlane>& images) {
    std::vector<ImagePlane> patches;
    for (std::size_t i = 0; i < images.size(); ++i) {
      PatchSpec s = spec;
      s.seed = spec.seed + i;
      auto ps = sample_patches(images[i], s);
      for (auto& p : ps) patches.push_back(std::move(p));
    }
    return frequency_profile(patches, BinKind::axis_averaged);
  };

  std::vector<ImagePlane> down, up;
  for (const auto& img : corpus) {
    down.push_back(resample_bicubic(img, 0.5));
    up.push_back(resample_bicubic(img, 2.0));
  }
  const DomainProfile src = domain_profile(corpus);
  const DomainProfile pd = domain_profile(down);
  const DomainProfile pu = domain_profile(up);
  const std::size_t nb = src.profile.bins.size();
  for (std::size_t l = nb / 2; l < nb; ++l) {
    CHECK(pd.profile.bins[l] > src.profile.bins[l]);
    CHECK(pu.profile.bins[l] < src.profile.bins[l]);
  }
}

TEST_CASE("radial profiles of isotropic content are insensitive to kernel rotation") {
  const ImagePlane img = make_fractal_image(128, 128, 88);
  const BlurKernel k0 = gaussian_kernel({1.8, 0.6, 0.0}, 13);
  const BlurKernel k90 = gaussian_kernel({1.8, 0.6, 3.14159265358979 / 2}, 13);
  const FrequencyProfile p0 =
      patch_profile(crop(convolve2d(img, k0), 32, 32, 64, 64), BinKind::radial);
  const FrequencyProfile p90 =
      patch_profile(crop(convolve2d(img, k90), 32, 32, 64, 64), BinKind::radial);
  REQUIRE(p0.bins.size() == 33);
  // same rings, swapped axes: radial binning folds the orientation away
  double rel = 0.0, norm = 0.0;
  for (std::size_t l = 1; l < p0.bins.size(); ++l) {
    rel += std::fabs(p0.bins[l] - p90.bins[l]);
    norm += p0.bins[l];
  }
  CHECK(rel / norm < 0.12);
}

TEST_CASE("folded axis profile equals the mean of the two axis halves") {
  const ImagePlane patch = crop(make_fractal_image(96, 96, 19), 5, 9, 64, 64);
  const FrequencyProfile folded = patch_profile(patch, BinKind::axis_averaged);
  const AxisProfilePair pair = patch_profile_axes(patch);
  REQUIRE(folded.bins.size() == pair.horizontal.bins.size());
  for (std::size_t l = 0; l < folded.bins.size(); ++l)
    CHECK(folded.bins[l] ==
          Catch::Approx(0.5 * (pair.horizontal.bins[l] + pair.vertical.bins[l])).epsilon(1e-12));
}
