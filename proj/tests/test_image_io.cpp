#include <catch2/catch_amalgamated.hpp>
#include <png.h>

#include <cstdio>
#include <sstream>

#include "fqa/png_io.hpp"
#include "fqa/raw_io.hpp"
#include "support.hpp"

using namespace fqa;

namespace {

// minimal 16-bit gray PNG writer, test-only
void write_png16(const std::string& path, int w, int h, const std::vector<std::uint16_t>& px) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint16_t v = px[static_cast<std::size_t>(y) * w + x];
      row[2 * x] = static_cast<unsigned char>(v >> 8);
      row[2 * x + 1] = static_cast<unsigned char>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

TEST_CASE("8-bit gray PNG values scale linearly into [0,1]") {
  testsup::TempDir tmp;
  ImagePlane img(2, 2);
  img.data = {0.f, 1.f, 128.f / 255.f, 64.f / 255.f};
  const std::string path = tmp.file("gray.png");
  save_image(path, img);
  const ImagePlane back = load_image(path);
  REQUIRE(back.width == 2);
  REQUIRE(back.height == 2);
  CHECK(back.data[0] == 0.0f);
  CHECK(back.data[1] == 1.0f);
  CHECK(back.data[2] == Catch::Approx(128.0 / 255.0).margin(1e-9));
  CHECK(back.data[3] == Catch::Approx(64.0 / 255.0).margin(1e-9));
}

TEST_CASE("pure red pixel collapses per channel policy") {
  testsup::TempDir tmp;
  RgbImage rgb;
  rgb.r = ImagePlane(1, 1, 1.f);
  rgb.g = ImagePlane(1, 1, 0.f);
  rgb.b = ImagePlane(1, 1, 0.f);
  const std::string path = tmp.file("red.png");
  save_rgb(path, rgb);
  CHECK(load_image(path, ChannelPolicy::luminance).data[0] ==
        Catch::Approx(0.299).margin(1e-6));
  CHECK(load_image(path, ChannelPolicy::channel_average).data[0] ==
        Catch::Approx(1.0 / 3.0).margin(1e-6));
}

TEST_CASE("load-save-load round trip stays within one quantization step") {
  testsup::TempDir tmp;
  const ImagePlane img = make_fractal_image(48, 48, 11);
  save_image(tmp.file("a.png"), img);
  const ImagePlane a = load_image(tmp.file("a.png"));
  save_image(tmp.file("b.png"), a);
  const ImagePlane b = load_image(tmp.file("b.png"));
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::fabs(a.data[i] - img.data[i]) <= 1.0f / 255.0f + 1e-6f);
    CHECK(a.data[i] == b.data[i]);  // second pass is exact
  }
}

TEST_CASE("16-bit gray PNG scales by 65535") {
  testsup::TempDir tmp;
  const std::string path = tmp.file("g16.png");
  write_png16(path, 2, 1, {0, 65535});
  const ImagePlane img = load_image(path);
  CHECK(img.data[0] == 0.0f);
  CHECK(img.data[1] == 1.0f);
}

TEST_CASE("loader errors carry the path") {
  testsup::TempDir tmp;
  CHECK_THROWS_AS(load_image(tmp.file("missing.png")), io_error);
  const std::string junk = tmp.file("junk.png");
  std::FILE* f = std::fopen(junk.c_str(), "wb");
  std::fputs("definitely not a png", f);
  std::fclose(f);
  CHECK_THROWS_AS(load_image(junk), format_error);
  try {
    load_image(junk);
  } catch (const format_error& e) {
    CHECK(std::string(e.what()).find(junk) != std::string::npos);
  }
}

TEST_CASE("FQA1 raw container round trip is bit exact") {
  testsup::TempDir tmp;
  ImagePlane img(5, 3);
  Rng rng(3);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform() * 2.0 - 0.5);  // out of [0,1] too
  const std::string path = tmp.file("plane.fqa1");
  write_raw_file(path, img);
  const ImagePlane back = read_raw_file(path);
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data[i] == img.data[i]);
}

TEST_CASE("load_image accepts the raw container and clamps") {
  testsup::TempDir tmp;
  ImagePlane img(2, 2);
  img.data = {-0.5f, 0.25f, 0.75f, 1.5f};
  const std::string path = tmp.file("plane.fqa1");
  write_raw_file(path, img);
  const ImagePlane back = load_image(path);
  CHECK(back.data[0] == 0.0f);
  CHECK(back.data[1] == 0.25f);
  CHECK(back.data[2] == 0.75f);
  CHECK(back.data[3] == 1.0f);
}

TEST_CASE("raw container rejects bad magic and truncation") {
  testsup::TempDir tmp;
  const std::string path = tmp.file("bad.fqa1");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("NOPE", f);
  std::fclose(f);
  CHECK_THROWS_AS(read_raw_file(path), format_error);

  std::ostringstream os;
  write_raw(os, 4, 4, std::vector<float>(16, 0.5f));
  std::string bytes = os.str();
  bytes.resize(bytes.size() - 7);
  std::istringstream is(bytes);
  CHECK_THROWS_AS(read_raw(is), format_error);
}
