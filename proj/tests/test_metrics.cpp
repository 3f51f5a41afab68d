#include <catch2/catch_amalgamated.hpp>

#include "fqa/convolve.hpp"
#include "fqa/metrics.hpp"
#include "fqa/png_io.hpp"
#include "support.hpp"

using namespace fqa;

TEST_CASE("psnr reference points") {
  const ImagePlane a = make_fractal_image(32, 32, 1);
  CHECK(psnr(a, a) == 100.0);

  const ImagePlane zeros(16, 16, 0.f), ones(16, 16, 1.f);
  CHECK(psnr(zeros, ones) == Catch::Approx(0.0).margin(1e-12));

  // MSE exactly 0.01 -> 20 dB
  ImagePlane b = zeros;
  for (auto& v : b.data) v = 0.1f;
  CHECK(psnr(zeros, b) == Catch::Approx(20.0).margin(1e-4));

  CHECK_THROWS_AS(psnr(zeros, ImagePlane(8, 8, 0.f)), argument_error);
}

TEST_CASE("ssim basic properties") {
  const ImagePlane a = crop(make_fractal_image(96, 96, 5), 3, 3, 64, 64);
  CHECK(ssim(a, a) == Catch::Approx(1.0).margin(1e-12));

  ImagePlane neg = a;
  for (auto& v : neg.data) v = 1.f - v;
  CHECK(ssim(a, neg) < 0.0);
  CHECK(ssim(a, neg) == Catch::Approx(ssim(neg, a)).margin(1e-9));

  CHECK_THROWS_AS(ssim(ImagePlane(10, 10, 0.f), ImagePlane(10, 10, 0.f)), argument_error);
  CHECK_THROWS_AS(ssim(a, ImagePlane(32, 32, 0.f)), argument_error);
}

TEST_CASE("ssim and psnr match an independent reference implementation") {
  // Reference values computed with scikit-image 0.25.2:
  //   structural_similarity(a, b, data_range=1.0, gaussian_weights=True,
  //                         sigma=1.5, use_sample_covariance=False)
  // on the shipped corpus images; b is img_00 blurred with the isotropic
  // sigma^2=3 kernel (side 19) and saved through the 8-bit PNG path.
  const ImagePlane a = load_image(testsup::data_dir() + "/mini_corpus/img_00.png");
  const ImagePlane c = load_image(testsup::data_dir() + "/mini_corpus/img_01.png");

  testsup::TempDir tmp;
  const BlurKernel k = gaussian_kernel({std::sqrt(3.0), std::sqrt(3.0), 0.0}, 19);
  save_image(tmp.file("blur.png"), convolve2d(a, k));
  const ImagePlane b = load_image(tmp.file("blur.png"));

  CHECK(ssim(a, b) == Catch::Approx(0.701857900).margin(5e-4));
  CHECK(ssim(a, c) == Catch::Approx(0.131542088).margin(5e-4));
  CHECK(psnr(a, b) == Catch::Approx(27.789618).margin(1e-3));
}
