// Runs the Sobel benchmark at each preset and writes PGM images next to the
// binary so the quality trade-off can be eyeballed.

#include <cstdio>

#include "sigtask/image.hpp"
#include "sigtask/kernels/sobel.hpp"
#include "sigtask/quality.hpp"

int main() {
  using namespace sigtask;

  const ImageBuffer img = generate_test_image(256, 42);
  write_pgm(img, "demo_input.pgm");
  const ImageBuffer ref = sobel_reference(img);
  write_pgm(ref, "demo_sobel_accurate.pgm");

  for (const auto preset : {DegreePreset::Mild, DegreePreset::Medium,
                            DegreePreset::Aggressive}) {
    Runtime rt(4, PolicyConfig::gtb_max_buffer());
    const auto result = sobel_run(img, preset, rt);
    const double q = psnr(ref, result.image);
    std::printf("%-10s psnr %6.2f dB  wall %.4fs\n", preset_name(preset), q,
                result.wall_secs);
    write_pgm(result.image,
              std::string("demo_sobel_") + preset_name(preset) + ".pgm");
  }
  return 0;
}
