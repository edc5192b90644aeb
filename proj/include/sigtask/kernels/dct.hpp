#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sigtask/image.hpp"
#include "sigtask/kernels/common.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

// 8x8 block DCT coefficients, stored per block position (JPEG-style layout,
// zero-padded to block multiples). Bands are the anti-diagonals u+v = k;
// lower k means lower spatial frequency.
struct DctPlanes {
  int width = 0;   // padded
  int height = 0;  // padded
  int source_width = 0;
  int source_height = 0;
  std::vector<double> coeffs;

  double& at(int x, int y) {
    return coeffs[static_cast<std::size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return coeffs[static_cast<std::size_t>(y) * width + x];
  }
};

namespace detail {

inline constexpr int kDctBlock = 8;
inline constexpr int kDctBands = 2 * kDctBlock - 1;  // u+v in [0, 14]

inline const std::array<double, 64>& dct_cos_table() {
  static const std::array<double, 64> table = [] {
    std::array<double, 64> t{};
    for (int u = 0; u < 8; ++u)
      for (int x = 0; x < 8; ++x)
        t[static_cast<std::size_t>(u) * 8 + x] =
            std::cos((2.0 * x + 1.0) * u * M_PI / 16.0);
    return t;
  }();
  return table;
}

inline double dct_alpha(int u) { return u == 0 ? 1.0 / std::sqrt(2.0) : 1.0; }

// One coefficient (u, v) of the block whose top-left pixel is (bx, by).
// Pixels are level-shifted by -128 as in JPEG.
inline double dct_coefficient(const ImageBuffer& img, int bx, int by, int u,
                              int v) {
  const auto& tbl = dct_cos_table();
  double acc = 0.0;
  for (int y = 0; y < kDctBlock; ++y) {
    const int py = by + y;
    double row = 0.0;
    for (int x = 0; x < kDctBlock; ++x) {
      const int px = bx + x;
      const double pix =
          (px < img.width && py < img.height)
              ? static_cast<double>(img.at(px, py)) - 128.0
              : 0.0;
      row += pix * tbl[static_cast<std::size_t>(u) * 8 + x];
    }
    acc += row * tbl[static_cast<std::size_t>(v) * 8 + y];
  }
  return 0.25 * dct_alpha(u) * dct_alpha(v) * acc;
}

// All coefficients on band u+v == k for every block of the image.
inline void dct_band(const ImageBuffer& img, DctPlanes& out, int k) {
  for (int by = 0; by < out.height; by += kDctBlock) {
    for (int bx = 0; bx < out.width; bx += kDctBlock) {
      for (int u = 0; u < kDctBlock; ++u) {
        const int v = k - u;
        if (v < 0 || v >= kDctBlock) continue;
        out.at(bx + u, by + v) = dct_coefficient(img, bx, by, u, v);
      }
    }
  }
}

}  // namespace detail

// Higher significance for lower-frequency bands, mapped into [0.05, 0.95]
// so no band is unconditional.
inline double dct_band_significance(int k) {
  return 0.05 + 0.9 * (1.0 - static_cast<double>(k) /
                                 (detail::kDctBands - 1));
}

inline DctPlanes make_dct_planes(const ImageBuffer& img) {
  DctPlanes p;
  p.source_width = img.width;
  p.source_height = img.height;
  p.width = (img.width + 7) / 8 * 8;
  p.height = (img.height + 7) / 8 * 8;
  p.coeffs.assign(static_cast<std::size_t>(p.width) * p.height, 0.0);
  return p;
}

inline DctPlanes dct_reference(const ImageBuffer& img) {
  DctPlanes p = make_dct_planes(img);
  for (int k = 0; k < detail::kDctBands; ++k) detail::dct_band(img, p, k);
  return p;
}

// Inverse transform back to an 8-bit image, cropped to the source size.
inline ImageBuffer dct_reconstruct(const DctPlanes& p) {
  ImageBuffer img(p.source_width, p.source_height);
  const auto& tbl = detail::dct_cos_table();
  for (int by = 0; by < p.height; by += 8) {
    for (int bx = 0; bx < p.width; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        const int py = by + y;
        if (py >= img.height) continue;
        for (int x = 0; x < 8; ++x) {
          const int px = bx + x;
          if (px >= img.width) continue;
          double acc = 0.0;
          for (int u = 0; u < 8; ++u) {
            for (int v = 0; v < 8; ++v) {
              acc += detail::dct_alpha(u) * detail::dct_alpha(v) *
                     p.at(bx + u, by + v) *
                     tbl[static_cast<std::size_t>(u) * 8 + x] *
                     tbl[static_cast<std::size_t>(v) * 8 + y];
            }
          }
          const double v = 0.25 * acc + 128.0;
          img.at(px, py) = static_cast<std::uint8_t>(
              std::lround(std::min(255.0, std::max(0.0, v))));
        }
      }
    }
  }
  return img;
}

struct DctResult {
  DctPlanes planes;
  double wall_secs = 0.0;
};

// One task per coefficient band across all blocks. There is no approximate
// body: a non-accurate band is dropped and its coefficients stay zero.
inline DctResult dct_run(const ImageBuffer& img, DegreePreset preset,
                         Runtime& rt, KernelTuning tuning = {}) {
  const double ratio = tuning.ratio_override.value_or(dct_preset_ratio(preset));
  DctResult result;
  result.planes = make_dct_planes(img);
  DctPlanes* out = &result.planes;
  const ImageBuffer* in = &img;

  const RegionId img_region = RegionId::token(1);
  auto band_region = [](int k) {
    return RegionId::token(0x200 + static_cast<std::uint64_t>(k));
  };

  const GroupId g = rt.init_group("dct", ratio);
  const std::uint64_t t0 = now_ns();
  for (int k = 0; k < detail::kDctBands; ++k) {
    const double sig =
        tuning.significance_override.value_or(dct_band_significance(k));
    const RegionId inputs[] = {img_region};
    const RegionId outputs[] = {band_region(k)};
    rt.spawn(
        g, Significance(sig), [in, out, k] { detail::dct_band(*in, *out, k); },
        TaskBody{}, inputs, outputs);
  }
  rt.wait_group(g);
  result.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;
  return result;
}

}  // namespace sigtask
