#include <catch2/catch_amalgamated.hpp>

#include "fqa/convolve.hpp"
#include "fqa/degrade.hpp"
#include "fqa/metrics.hpp"
#include "support.hpp"

using namespace fqa;

namespace {

BlurKernel delta_kernel(int side) {
  BlurKernel k;
  k.side = side;
  k.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
  k.weights[static_cast<std::size_t>(side / 2) * side + side / 2] = 1.0;
  return k;
}

}  // namespace

TEST_CASE("delta kernel is the identity element") {
  const ImagePlane img = make_fractal_image(40, 40, 21);
  const ImagePlane out = convolve2d(img, delta_kernel(5));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("constants pass through any normalized kernel") {
  const ImagePlane img(32, 32, 0.731f);
  const BlurKernel k = gaussian_kernel({1.6, 0.7, 0.9}, 9);
  const ImagePlane out = convolve2d(img, k);
  for (float v : out.data)
    CHECK(std::fabs(v - 0.731f) <= 1e-6f);  // float plane; weights sum to 1 within 1e-9
}

TEST_CASE("impulse response reproduces the kernel weights") {
  ImagePlane img(21, 21, 0.f);
  img.at(10, 10) = 1.f;
  const BlurKernel k = gaussian_kernel({1.0, 2.0, 0.3}, 7);
  const ImagePlane out = convolve2d(img, k);
  for (int v = -3; v <= 3; ++v)
    for (int u = -3; u <= 3; ++u)
      CHECK(out.at(10 + u, 10 + v) == Catch::Approx(k.at(u, v)).margin(1e-7));
}

TEST_CASE("the raw convolution core is linear") {
  Rng rng(5);
  ImagePlane a(24, 24), b(24, 24);
  for (auto& v : a.data) v = static_cast<float>(rng.uniform());
  for (auto& v : b.data) v = static_cast<float>(rng.uniform());
  const BlurKernel k = gaussian_kernel({0.8, 1.4, 1.1}, 7);
  const double alpha = 0.37, beta = -0.21;

  ImagePlane mix(24, 24);
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix.data[i] = static_cast<float>(alpha * a.data[i] + beta * b.data[i]);

  const ImagePlane ca = detail::conv_same(a, k.weights, k.side);
  const ImagePlane cb = detail::conv_same(b, k.weights, k.side);
  const ImagePlane cm = detail::conv_same(mix, k.weights, k.side);
  for (std::size_t i = 0; i < cm.size(); ++i)
    CHECK(std::fabs(cm.data[i] - (alpha * ca.data[i] + beta * cb.data[i])) < 1e-6);
}

TEST_CASE("reflect boundary preserves the mean on smooth content") {
  // low-frequency content: constants plus a gentle ramp
  ImagePlane img(48, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x) img.at(x, y) = 0.4f + 0.2f * (x / 47.f);
  const BlurKernel k = gaussian_kernel({1.2, 1.2, 0.0}, 9);
  const ImagePlane out = convolve2d(img, k);
  CHECK(out.mean() == Catch::Approx(img.mean()).margin(1e-6));

  const ImagePlane flat(30, 30, 0.62f);
  CHECK(convolve2d(flat, k).mean() == Catch::Approx(flat.mean()).margin(1e-9));
}

TEST_CASE("convolution argument contracts") {
  const ImagePlane img(16, 16, 0.5f);
  BlurKernel even;
  even.side = 4;
  even.weights.assign(16, 1.0 / 16.0);
  CHECK_THROWS_AS(convolve2d(img, even), argument_error);
  CHECK_THROWS_AS(convolve2d(img, gaussian_kernel({1, 1, 0}, 19)), argument_error);
}

TEST_CASE("degradation pins downsample-then-blur order") {
  ImagePlane impulse(64, 64, 0.f);
  impulse.at(32, 32) = 1.f;
  const DegradationConfig cfg{4, 5, {0.8, 0.8, 0.0}};

  const ImagePlane got = degrade(impulse, cfg);
  const ImagePlane want =
      convolve2d(resample_bicubic(impulse, 0.25), gaussian_kernel(cfg.params, cfg.kernel_side));
  REQUIRE(got.width == want.width);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.data[i] == want.data[i]);

  // the opposite order is measurably different on an impulse
  const ImagePlane other =
      resample_bicubic(convolve2d(impulse, gaussian_kernel(cfg.params, cfg.kernel_side)), 0.25);
  double diff = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    diff += std::fabs(static_cast<double>(got.data[i]) - other.data[i]);
  CHECK(diff > 1e-3);
}

TEST_CASE("degradation of constants and small-image contracts") {
  const ImagePlane flat(64, 64, 0.5f);
  const ImagePlane out = degrade(flat, {4, 13, {1.0, 1.0, 0.0}});
  REQUIRE(out.width == 16);
  for (float v : out.data) CHECK(v == Catch::Approx(0.5).margin(1e-6));

  const ImagePlane small(20, 20, 0.5f);
  CHECK_THROWS_AS(degrade(small, {4, 13, {1.0, 1.0, 0.0}}), argument_error);
}

TEST_CASE("near-delta degradation matches plain bicubic downsampling") {
  const ImagePlane img = make_fractal_image(128, 128, 31);
  const ImagePlane a = degrade(img, {4, 13, {0.1, 0.1, 0.0}});
  const ImagePlane b = resample_bicubic(img, 0.25);
  CHECK(psnr(a, b) > 45.0);
}
