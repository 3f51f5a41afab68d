#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fqa/convolve.hpp"
#include "fqa/wavelet.hpp"
#include "fqa/wd.hpp"
#include "support.hpp"

using namespace fqa;

namespace {

double plane_energy(const ImagePlane& p) {
  double e = 0.0;
  for (float v : p.data) e += static_cast<double>(v) * v;
  return e;
}

/// Single linear layer with unit weight: the critic score equals its
/// (one-dimensional) input, which makes the loss algebra testable.
WaveletDiscriminator passthrough_critic() {
  WaveletDiscriminator d;
  d.net = DenseNet::make({1, 1}, 0.2, 1);
  d.net.w[0][0] = 1.0;
  d.net.b[0][0] = 0.0;
  d.patch_size = 0;
  return d;
}

}  // namespace

TEST_CASE("Haar analysis of constants") {
  const ImagePlane img(16, 16, 0.25f);
  const WaveletBands bands = haar_dwt(img);
  REQUIRE(bands.ll.width == 8);
  for (float v : bands.ll.data) CHECK(v == Catch::Approx(0.5).margin(1e-7));
  for (const ImagePlane* hf : {&bands.lh, &bands.hl, &bands.hh})
    for (float v : hf->data) CHECK(v == 0.0f);
}

TEST_CASE("a signed checkerboard lands entirely in HH") {
  ImagePlane img(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y) = ((x + y) % 2 == 0) ? 1.f : -1.f;
  const WaveletBands bands = haar_dwt(img);
  CHECK(plane_energy(bands.ll) == 0.0);
  CHECK(plane_energy(bands.lh) == 0.0);
  CHECK(plane_energy(bands.hl) == 0.0);
  CHECK(plane_energy(bands.hh) == Catch::Approx(plane_energy(img)).epsilon(1e-12));
}

TEST_CASE("Haar round trip and energy preservation") {
  Rng rng(66);
  ImagePlane img(30, 22);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  const WaveletBands bands = haar_dwt(img);
  const double band_energy = plane_energy(bands.ll) + plane_energy(bands.lh) +
                             plane_energy(bands.hl) + plane_energy(bands.hh);
  CHECK(band_energy == Catch::Approx(plane_energy(img)).margin(1e-6));

  const ImagePlane back = haar_idwt(bands);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(std::fabs(back.data[i] - img.data[i]) < 1e-6);
}

TEST_CASE("odd dimensions lose their last row and column") {
  const ImagePlane img = make_fractal_image(17, 15, 3);
  const WaveletBands bands = haar_dwt(img);
  CHECK(bands.ll.width == 8);
  CHECK(bands.ll.height == 7);
}

TEST_CASE("degenerate wavelet inputs are rejected") {
  CHECK_THROWS_AS(haar_dwt(ImagePlane(1, 8, 0.f)), argument_error);
  WaveletBands bad;
  bad.ll = ImagePlane(4, 4);
  bad.lh = ImagePlane(4, 4);
  bad.hl = ImagePlane(4, 4);
  bad.hh = ImagePlane(3, 4);
  CHECK_THROWS_AS(haar_idwt(bad), argument_error);
}

TEST_CASE("zero bands reconstruct to a zero image") {
  WaveletBands zero;
  zero.ll = ImagePlane(4, 4, 0.f);
  zero.lh = zero.ll;
  zero.hl = zero.ll;
  zero.hh = zero.ll;
  for (float v : haar_idwt(zero).data) CHECK(v == 0.0f);
}

TEST_CASE("dropping the high bands removes exactly their energy") {
  const ImagePlane img = crop(make_fractal_image(64, 64, 12), 0, 0, 32, 32);
  WaveletBands bands = haar_dwt(img);
  const double removed =
      plane_energy(bands.lh) + plane_energy(bands.hl) + plane_energy(bands.hh);
  bands.lh = ImagePlane(bands.lh.width, bands.lh.height, 0.f);
  bands.hl = bands.lh;
  bands.hh = bands.lh;
  const ImagePlane lowpass = haar_idwt(bands);
  double residual = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double d = static_cast<double>(img.data[i]) - lowpass.data[i];
    residual += d * d;
  }
  CHECK(residual == Catch::Approx(removed).margin(1e-6));
}

TEST_CASE("blur cannot raise high-band energy") {
  const auto corpus = testsup::small_corpus(4, 256, 5005);
  const BlurKernel k = gaussian_kernel({1.0, 1.0, 0.0}, 13);
  int checked = 0;
  for (const auto& img : corpus) {
    const ImagePlane blurred = convolve2d(img, k);
    for (int p = 0; p < 8; ++p) {
      const int ox = 12 + 27 * p, oy = 20 + 23 * p;
      const WaveletBands a = haar_dwt(crop(img, ox, oy, 32, 32));
      const WaveletBands b = haar_dwt(crop(blurred, ox, oy, 32, 32));
      const double ea = plane_energy(a.lh) + plane_energy(a.hl) + plane_energy(a.hh);
      const double eb = plane_energy(b.lh) + plane_energy(b.hl) + plane_energy(b.hh);
      CHECK(eb <= ea);
      ++checked;
    }
  }
  CHECK(checked == 32);
}

TEST_CASE("high-band features have the documented layout") {
  const ImagePlane patch = crop(make_fractal_image(64, 64, 77), 8, 8, 32, 32);
  const auto feats = highband_features(patch);
  CHECK(static_cast<int>(feats.size()) == highband_feature_count(32));
  CHECK(highband_feature_count(32) == 6 + 3 * 9);
  for (double f : feats) CHECK(std::isfinite(f));
}

TEST_CASE("least-squares critic losses follow the stated values") {
  const WaveletDiscriminator d = passthrough_critic();
  const FeatureBatch one{{1.0}}, zero{{0.0}}, minus{{-1.0}};

  // critic objective
  CHECK(wd_loss_discriminator(d, one, zero) == 0.0);   // real->1, fake->0
  CHECK(wd_loss_discriminator(d, zero, one) == 2.0);   // real->0, fake->1
  CHECK(wd_loss_discriminator(d, zero, zero) == 1.0);  // all outputs zero

  // generator objective
  CHECK(wd_loss_generator(d, one) == 0.0);
  CHECK(wd_loss_generator(d, zero) == 1.0);
  CHECK(wd_loss_generator(d, minus) == 4.0);

  CHECK_THROWS_AS(wd_loss_discriminator(d, {}, one), argument_error);
  CHECK_THROWS_AS(wd_loss_generator(d, {}), argument_error);
}

TEST_CASE("zero learning rate leaves the critic unchanged") {
  WdTrainState st = WdTrainState::make(32, 8, 6, 4, 11);
  const ImagePlane patch = crop(make_fractal_image(64, 64, 5), 4, 4, 32, 32);
  const auto f = highband_features(patch);
  const std::vector<float> before = flatten_params(st.model.net);
  wd_step(st, {f}, {f}, 0.0);
  CHECK(flatten_params(st.model.net) == before);
}

TEST_CASE("the critic separates a linearly separable toy task") {
  WdTrainState st;
  st.model.net = DenseNet::make({4, 8, 8, 6, 1}, 0.2, 3);
  st.model.patch_size = 0;
  st.opt = AdamState::zeros_like(st.model.net);

  Rng rng(8);
  FeatureBatch real, fake;
  for (int i = 0; i < 16; ++i) {
    std::vector<double> r(4), f(4);
    for (auto& v : r) v = 1.0 + 0.1 * rng.normal();
    for (auto& v : f) v = -1.0 + 0.1 * rng.normal();
    real.push_back(r);
    fake.push_back(f);
  }
  double loss = 0.0;
  for (int i = 0; i < 500; ++i) loss = wd_step(st, real, fake, 3e-3);
  CHECK(loss < 0.1);
}

TEST_CASE("analytic critic gradients match central finite differences") {
  WaveletDiscriminator model;
  model.net = DenseNet::make({10, 12, 8, 6, 1}, 0.2, 404);
  model.patch_size = 0;

  Rng rng(9);
  FeatureBatch real, fake;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> r(10), f(10);
    for (auto& v : r) v = rng.normal();
    for (auto& v : f) v = rng.normal();
    real.push_back(r);
    fake.push_back(f);
  }

  NetGrads grads = NetGrads::zeros_like(model.net);
  wd_loss_gradients(model, real, fake, grads);

  std::vector<double*> params;
  for (std::size_t l = 0; l < model.net.w.size(); ++l) {
    for (auto& x : model.net.w[l]) params.push_back(&x);
    for (auto& x : model.net.b[l]) params.push_back(&x);
  }
  std::vector<double> g;
  for (std::size_t l = 0; l < grads.w.size(); ++l) {
    for (double x : grads.w[l]) g.push_back(x);
    for (double x : grads.b[l]) g.push_back(x);
  }

  Rng pick(606);
  const double delta = 1e-4;
  double max_rel = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const std::size_t idx = pick.below(params.size());
    const double keep = *params[idx];
    *params[idx] = keep + delta;
    const double lp = wd_loss_discriminator(model, real, fake);
    *params[idx] = keep - delta;
    const double lm = wd_loss_discriminator(model, real, fake);
    *params[idx] = keep;
    const double fd = (lp - lm) / (2.0 * delta);
    const double rel = std::fabs(fd - g[idx]) / std::max({std::fabs(fd), std::fabs(g[idx]), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  CHECK(max_rel < 1e-3);
}

TEST_CASE("critic checkpoints round trip with their own tag") {
  WaveletDiscriminator d = WaveletDiscriminator::make(32, 8, 6, 4, 2020);
  std::ostringstream os;
  save_discriminator(os, d);
  std::istringstream is(os.str());
  const WaveletDiscriminator back = load_discriminator(is);
  CHECK(back.patch_size == 32);
  CHECK(back.net.dims == d.net.dims);

  std::istringstream wrong(os.str());
  CHECK_THROWS_AS(load_comparator(wrong), format_error);
}
