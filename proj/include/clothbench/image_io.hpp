#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "clothbench/error.hpp"
#include "clothbench/mask.hpp"

namespace clothbench {

inline std::vector<uint8_t> gray_bytes(const GrayImage& img) {
  std::vector<uint8_t> out(img.intensity.size());
  for (size_t k = 0; k < out.size(); ++k) {
    double v = clamp(img.intensity[k], 0.0, 1.0);
    out[k] = static_cast<uint8_t>(v * 255.0 + 0.5);
  }
  return out;
}

inline std::vector<uint8_t> mask_bytes(const BinaryMask& m) {
  std::vector<uint8_t> out(m.bits.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = m.bits[k] ? 255 : 0;
  return out;
}

// Rows are flipped on write so +y in the world is up in the viewed file.
inline void write_pgm(const std::string& path, int width, int height,
                      const std::vector<uint8_t>& row_major) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for write: " + path);
  f << "P5\n" << width << " " << height << "\n255\n";
  for (int j = height - 1; j >= 0; --j)
    f.write(reinterpret_cast<const char*>(row_major.data() + static_cast<size_t>(j) * width),
            width);
}

inline void write_pgm(const std::string& path, const BinaryMask& m) {
  write_pgm(path, m.width_px, m.height_px, mask_bytes(m));
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  write_pgm(path, img.width_px, img.height_px, gray_bytes(img));
}

// P5 reader; any pixel above half maxval counts as occupied when the result
// is used as a mask.
inline GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw ParseError(path + ": expected P5 graymap");
  auto next_int = [&f, &path]() {
    int c;
    for (;;) {
      c = f.get();
      if (c == '#') {
        while (c != '\n' && c != EOF) c = f.get();
      } else if (!std::isspace(c)) {
        break;
      }
    }
    if (c == EOF) throw ParseError(path + ": truncated header");
    f.unget();
    int v;
    f >> v;
    return v;
  };
  int w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw ParseError(path + ": unsupported P5 header");
  f.get();  // single whitespace after maxval
  std::vector<uint8_t> data(static_cast<size_t>(w) * h);
  f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw ParseError(path + ": truncated pixel data");
  GrayImage img(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i)
      img.ref(i, j) = data[static_cast<size_t>(h - 1 - j) * w + i] / double(maxval);
  return img;
}

inline BinaryMask mask_from_gray(const GrayImage& img, double scale = 1.0,
                                 Vec2 origin = {}) {
  BinaryMask m(img.width_px, img.height_px, scale, origin);
  for (int j = 0; j < img.height_px; ++j)
    for (int i = 0; i < img.width_px; ++i)
      if (img.at(i, j) > 0.5) m.set(i, j);
  return m;
}

namespace detail {

inline void png_chunk(std::ofstream& f, const char type[4],
                      const std::vector<uint8_t>& data) {
  auto be32 = [](uint32_t v) {
    return std::array<uint8_t, 4>{static_cast<uint8_t>(v >> 24),
                                  static_cast<uint8_t>(v >> 16),
                                  static_cast<uint8_t>(v >> 8),
                                  static_cast<uint8_t>(v)};
  };
  auto len = be32(static_cast<uint32_t>(data.size()));
  f.write(reinterpret_cast<const char*>(len.data()), 4);
  f.write(type, 4);
  if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), data.size());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  auto crcb = be32(static_cast<uint32_t>(crc));
  f.write(reinterpret_cast<const char*>(crcb.data()), 4);
}

inline void write_png_gray(const std::string& path, int width, int height, int bit_depth,
                           const std::vector<uint8_t>& scanlines) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for write: " + path);
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr(13);
  auto put32 = [&ihdr](size_t at, uint32_t v) {
    ihdr[at] = static_cast<uint8_t>(v >> 24);
    ihdr[at + 1] = static_cast<uint8_t>(v >> 16);
    ihdr[at + 2] = static_cast<uint8_t>(v >> 8);
    ihdr[at + 3] = static_cast<uint8_t>(v);
  };
  put32(0, static_cast<uint32_t>(width));
  put32(4, static_cast<uint32_t>(height));
  ihdr[8] = static_cast<uint8_t>(bit_depth);
  ihdr[9] = 0;   // grayscale
  ihdr[10] = 0;  // deflate
  ihdr[11] = 0;  // filter method 0
  ihdr[12] = 0;  // no interlace
  png_chunk(f, "IHDR", ihdr);

  uLongf bound = compressBound(static_cast<uLong>(scanlines.size()));
  std::vector<uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, scanlines.data(),
                static_cast<uLong>(scanlines.size()), 9) != Z_OK)
    throw Error("png deflate failed for " + path);
  compressed.resize(bound);
  png_chunk(f, "IDAT", compressed);
  png_chunk(f, "IEND", {});
}

}  // namespace detail

// 1-bit grayscale PNG of a mask, +y up.
inline void write_png(const std::string& path, const BinaryMask& m) {
  int row_bytes = (m.width_px + 7) / 8;
  std::vector<uint8_t> scan;
  scan.reserve(static_cast<size_t>(m.height_px) * (row_bytes + 1));
  for (int j = m.height_px - 1; j >= 0; --j) {
    scan.push_back(0);  // filter: none
    for (int b = 0; b < row_bytes; ++b) {
      uint8_t byte = 0;
      for (int k = 0; k < 8; ++k) {
        int i = b * 8 + k;
        if (i < m.width_px && m.at(i, j)) byte |= static_cast<uint8_t>(0x80 >> k);
      }
      scan.push_back(byte);
    }
  }
  detail::write_png_gray(path, m.width_px, m.height_px, 1, scan);
}

// 8-bit grayscale PNG of a rendered image, +y up.
inline void write_png(const std::string& path, const GrayImage& img) {
  auto bytes = gray_bytes(img);
  std::vector<uint8_t> scan;
  scan.reserve(static_cast<size_t>(img.height_px) * (img.width_px + 1));
  for (int j = img.height_px - 1; j >= 0; --j) {
    scan.push_back(0);
    for (int i = 0; i < img.width_px; ++i)
      scan.push_back(bytes[static_cast<size_t>(j) * img.width_px + i]);
  }
  detail::write_png_gray(path, img.width_px, img.height_px, 8, scan);
}

}  // namespace clothbench
