#pragma once
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fqa/errors.hpp"
#include "fqa/image.hpp"

namespace fqa {

// Raw float container: little-endian magic "FQA1", u32 width, u32 height,
// then width*height IEEE-754 binary32 values, row-major. Used for golden
// files, kernel export and checkpoint payloads.

inline constexpr char kRawMagic[4] = {'F', 'Q', 'A', '1'};

namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f32le(std::ostream& os, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32le(os, v);
}

inline float get_f32le(std::istream& is) {
  const std::uint32_t v = get_u32le(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace detail

inline void write_raw(std::ostream& os, int width, int height, const std::vector<float>& values) {
  if (width < 1 || height < 1 ||
      values.size() != static_cast<std::size_t>(width) * height)
    throw argument_error("write_raw: dimensions do not match value count");
  os.write(kRawMagic, 4);
  detail::put_u32le(os, static_cast<std::uint32_t>(width));
  detail::put_u32le(os, static_cast<std::uint32_t>(height));
  for (float v : values) detail::put_f32le(os, v);
}

inline ImagePlane read_raw(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kRawMagic, 4) != 0)
    throw format_error("read_raw: missing FQA1 magic");
  const std::uint32_t w = detail::get_u32le(is);
  const std::uint32_t h = detail::get_u32le(is);
  if (!is || w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
    throw format_error("read_raw: implausible dimensions");
  ImagePlane out(static_cast<int>(w), static_cast<int>(h));
  for (auto& v : out.data) v = detail::get_f32le(is);
  if (!is) throw format_error("read_raw: truncated payload");
  return out;
}

inline void write_raw_file(const std::string& path, const ImagePlane& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open for writing: " + path);
  write_raw(os, img.width, img.height, img.data);
  if (!os) throw io_error("write failed: " + path);
}

inline ImagePlane read_raw_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open: " + path);
  return read_raw(is);
}

}  // namespace fqa
