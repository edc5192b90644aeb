#pragma once

#include <cmath>
#include <cstdint>

#include "sigtask/image.hpp"
#include "sigtask/kernels/common.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

namespace detail {

inline std::uint8_t clamp_mag(double m) {
  if (m >= 255.0) return 255;
  if (m <= 0.0) return 0;
  return static_cast<std::uint8_t>(std::lround(m));
}

// Full 3x3 stencil, gradient magnitude sqrt(gx^2 + gy^2).
inline void sobel_row_accurate(const ImageBuffer& in, ImageBuffer& out, int y) {
  if (y == 0 || y == in.height - 1) return;  // borders stay zero
  for (int x = 1; x < in.width - 1; ++x) {
    const int tl = in.at(x - 1, y - 1), tc = in.at(x, y - 1),
              tr = in.at(x + 1, y - 1);
    const int ml = in.at(x - 1, y), mr = in.at(x + 1, y);
    const int bl = in.at(x - 1, y + 1), bc = in.at(x, y + 1),
              br = in.at(x + 1, y + 1);
    const int gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
    const int gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr);
    out.at(x, y) = clamp_mag(
        std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy));
  }
}

// Lightweight variant: the center column of each kernel is skipped (6 of the
// 9 taps are read) and |gx| + |gy| replaces the square root.
inline void sobel_row_approx(const ImageBuffer& in, ImageBuffer& out, int y) {
  if (y == 0 || y == in.height - 1) return;
  for (int x = 1; x < in.width - 1; ++x) {
    const int tl = in.at(x - 1, y - 1), tr = in.at(x + 1, y - 1);
    const int ml = in.at(x - 1, y), mr = in.at(x + 1, y);
    const int bl = in.at(x - 1, y + 1), br = in.at(x + 1, y + 1);
    const int gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
    const int gy = (bl + br) - (tl + tr);
    out.at(x, y) = clamp_mag(static_cast<double>(std::abs(gx) + std::abs(gy)));
  }
}

}  // namespace detail

inline ImageBuffer sobel_reference(const ImageBuffer& img) {
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    detail::sobel_row_accurate(img, out, y);
  return out;
}

struct SobelResult {
  ImageBuffer image;
  double wall_secs = 0.0;
};

// One task per output row; significance cycles over {0.1..0.9} so the
// approximated rows spread uniformly across the image.
inline SobelResult sobel_run(const ImageBuffer& img, DegreePreset preset,
                             Runtime& rt, KernelTuning tuning = {}) {
  if (img.width < 3 || img.height < 3)
    throw std::invalid_argument("sobel needs at least a 3x3 image");
  const double ratio =
      tuning.ratio_override.value_or(sobel_preset_ratio(preset));
  SobelResult result;
  result.image = ImageBuffer(img.width, img.height);
  ImageBuffer* out = &result.image;
  const ImageBuffer* in = &img;

  const RegionId img_region = RegionId::token(1);
  auto row_region = [](int y) {
    return RegionId::token(0x100 + static_cast<std::uint64_t>(y));
  };

  const GroupId g = rt.init_group("sobel", ratio);
  const std::uint64_t t0 = now_ns();
  for (int y = 0; y < img.height; ++y) {
    const double sig = tuning.significance_override.value_or(
        cycled_significance(static_cast<std::uint64_t>(y)));
    const RegionId inputs[] = {img_region};
    const RegionId outputs[] = {row_region(y)};
    rt.spawn(
        g, Significance(sig),
        [in, out, y] { detail::sobel_row_accurate(*in, *out, y); },
        [in, out, y] { detail::sobel_row_approx(*in, *out, y); }, inputs,
        outputs);
  }
  rt.wait_group(g);
  result.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;
  return result;
}

}  // namespace sigtask
