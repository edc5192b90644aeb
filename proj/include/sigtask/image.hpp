#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigtask {

// Row-major 8-bit grayscale image.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
               fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("bad image dimensions");
  }

  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height;
  }
};

// Deterministic synthetic test input: gradients, stripes and a couple of
// discs give the edge detector something to find, plus seeded noise so two
// seeds produce distinct images.
inline ImageBuffer generate_test_image(int size, std::uint64_t seed) {
  if (size < 3) throw std::invalid_argument("image size must be at least 3");
  ImageBuffer img(size, size);
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
  auto next = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  const double cx1 = size * 0.32, cy1 = size * 0.38, r1 = size * 0.18;
  const double cx2 = size * 0.70, cy2 = size * 0.64, r2 = size * 0.11;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = 40.0 + 120.0 * x / size + 40.0 * y / size;
      if (((x / 13) + (y / 13)) % 2 == 0) v += 35.0;
      const double d1 = std::hypot(x - cx1, y - cy1);
      const double d2 = std::hypot(x - cx2, y - cy2);
      if (d1 < r1) v = 220.0 - 0.3 * d1;
      if (d2 < r2) v = 25.0 + 0.5 * d2;
      v += static_cast<double>(next() % 17) - 8.0;
      v = std::min(255.0, std::max(0.0, v));
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return img;
}

inline void write_pgm(const ImageBuffer& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace sigtask
