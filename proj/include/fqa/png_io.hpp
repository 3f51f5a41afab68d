#pragma once
#include <png.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"
#include "fqa/raw_io.hpp"

namespace fqa {

/// How multi-channel inputs collapse to one plane.
enum class ChannelPolicy {
  luminance,        ///< Rec. 601: 0.299 R + 0.587 G + 0.114 B
  channel_average,  ///< (R + G + B) / 3
};

namespace detail {

struct FileHandle {
  std::FILE* f = nullptr;
  explicit FileHandle(const std::string& path, const char* mode) : f(std::fopen(path.c_str(), mode)) {}
  ~FileHandle() {
    if (f) std::fclose(f);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png) info = png_create_info_struct(png);
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png) info = png_create_info_struct(png);
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

/// Decodes a PNG into interleaved [0,1] floats; channels is 1 or 3.
inline void decode_png(const std::string& path, std::vector<float>& out, int& width,
                       int& height, int& channels) {
  FileHandle fh(path, "rb");
  if (!fh.f) throw io_error("cannot open: " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fh.f) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw format_error("not a PNG file: " + path);

  PngReader r;
  if (!r.png || !r.info) throw io_error("libpng init failed: " + path);
  if (setjmp(png_jmpbuf(r.png))) throw format_error("PNG decode failed: " + path);

  png_init_io(r.png, fh.f);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);

  // Normalize everything to 8- or 16-bit gray or RGB samples.
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(r.png, r.info) < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
  png_set_interlace_handling(r.png);
  png_read_update_info(r.png, r.info);

  const int depth = png_get_bit_depth(r.png, r.info);
  const int nch = png_get_channels(r.png, r.info);
  if (depth != 8 && depth != 16)
    throw format_error("unsupported PNG bit depth " + std::to_string(depth) + ": " + path);
  if (nch != 1 && nch != 3)
    throw format_error("unsupported PNG channel count " + std::to_string(nch) + ": " + path);

  const std::size_t stride = png_get_rowbytes(r.png, r.info);
  std::vector<unsigned char> raw(stride * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * stride;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  width = static_cast<int>(w);
  height = static_cast<int>(h);
  channels = nch;
  out.resize(static_cast<std::size_t>(width) * height * nch);
  const std::size_t n = out.size();
  if (depth == 8) {
    for (std::size_t i = 0; i < n; ++i) out[i] = raw[i] / 255.f;
  } else {
    // PNG stores 16-bit samples big-endian.
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      out[i] = v / 65535.f;
    }
  }
}

inline void encode_png(const std::string& path, const unsigned char* data, int width,
                       int height, int channels) {
  FileHandle fh(path, "wb");
  if (!fh.f) throw io_error("cannot open for writing: " + path);
  PngWriter w;
  if (!w.png || !w.info) throw io_error("libpng init failed: " + path);
  if (setjmp(png_jmpbuf(w.png))) throw io_error("PNG encode failed: " + path);

  png_init_io(w.png, fh.f);
  png_set_IHDR(w.png, w.info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<png_bytep> rows(height);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data + y * stride);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

inline unsigned char quantize8(float v) {
  const float c = std::min(1.f, std::max(0.f, v));
  return static_cast<unsigned char>(c * 255.f + 0.5f);
}

inline bool has_raw_magic(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return false;
  char magic[4] = {0, 0, 0, 0};
  const std::size_t got = std::fread(magic, 1, 4, f);
  std::fclose(f);
  return got == 4 && std::memcmp(magic, kRawMagic, 4) == 0;
}

}  // namespace detail

/// Loads an 8/16-bit PNG (gray, palette or RGB) or an FQA1 raw file as a
/// single [0,1] plane. RGB inputs collapse per the channel policy.
inline ImagePlane load_image(const std::string& path,
                             ChannelPolicy policy = ChannelPolicy::luminance) {
  if (detail::has_raw_magic(path)) {
    ImagePlane img = read_raw_file(path);
    img.clamp01();
    return img;
  }
  std::vector<float> samples;
  int w = 0, h = 0, ch = 0;
  detail::decode_png(path, samples, w, h, ch);
  ImagePlane img(w, h);
  if (ch == 1) {
    std::copy(samples.begin(), samples.end(), img.data.begin());
  } else {
    const bool lum = policy == ChannelPolicy::luminance;
    for (std::size_t i = 0, n = img.size(); i < n; ++i) {
      const float r = samples[3 * i], g = samples[3 * i + 1], b = samples[3 * i + 2];
      img.data[i] = lum ? 0.299f * r + 0.587f * g + 0.114f * b : (r + g + b) / 3.f;
    }
  }
  img.clamp01();
  return img;
}

/// Writes an 8-bit grayscale PNG.
inline void save_image(const std::string& path, const ImagePlane& img) {
  if (img.empty()) throw argument_error("save_image: empty image");
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = detail::quantize8(img.data[i]);
  detail::encode_png(path, bytes.data(), img.width, img.height, 1);
}

/// RGB triple; pair generation degrades each channel with the same kernel.
struct RgbImage {
  ImagePlane r, g, b;
  bool gray = false;  ///< source had a single channel (r==g==b)
};

inline RgbImage load_rgb(const std::string& path) {
  if (detail::has_raw_magic(path)) {
    RgbImage out;
    out.r = read_raw_file(path);
    out.r.clamp01();
    out.g = out.r;
    out.b = out.r;
    out.gray = true;
    return out;
  }
  std::vector<float> samples;
  int w = 0, h = 0, ch = 0;
  detail::decode_png(path, samples, w, h, ch);
  RgbImage out;
  out.r = ImagePlane(w, h);
  if (ch == 1) {
    std::copy(samples.begin(), samples.end(), out.r.data.begin());
    out.g = out.r;
    out.b = out.r;
    out.gray = true;
  } else {
    out.g = ImagePlane(w, h);
    out.b = ImagePlane(w, h);
    for (std::size_t i = 0, n = out.r.size(); i < n; ++i) {
      out.r.data[i] = samples[3 * i];
      out.g.data[i] = samples[3 * i + 1];
      out.b.data[i] = samples[3 * i + 2];
    }
  }
  return out;
}

inline void save_rgb(const std::string& path, const RgbImage& img) {
  if (img.gray) {
    save_image(path, img.r);
    return;
  }
  if (img.r.width != img.g.width || img.r.width != img.b.width ||
      img.r.height != img.g.height || img.r.height != img.b.height)
    throw argument_error("save_rgb: channel dimensions differ");
  std::vector<unsigned char> bytes(img.r.size() * 3);
  for (std::size_t i = 0; i < img.r.size(); ++i) {
    bytes[3 * i] = detail::quantize8(img.r.data[i]);
    bytes[3 * i + 1] = detail::quantize8(img.g.data[i]);
    bytes[3 * i + 2] = detail::quantize8(img.b.data[i]);
  }
  detail::encode_png(path, bytes.data(), img.r.width, img.r.height, 3);
}

}  // namespace fqa
