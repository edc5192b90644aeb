#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "sigtask/image.hpp"
#include "sigtask/kernels/alternating.hpp"
#include "sigtask/kernels/dct.hpp"
#include "sigtask/kernels/jacobi.hpp"
#include "sigtask/kernels/kmeans.hpp"
#include "sigtask/kernels/montecarlo.hpp"
#include "sigtask/kernels/sobel.hpp"
#include "sigtask/quality.hpp"

using namespace sigtask;

namespace {

// Dense direct solve (Gaussian elimination, partial pivoting); the oracle the
// iterative results are judged against.
std::vector<double> direct_solve(const LinearSystem& sys) {
  const int n = sys.n;
  std::vector<double> a = sys.a;
  std::vector<double> b = sys.b;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
          std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(col) * n + c],
                  a[static_cast<std::size_t>(pivot) * n + c]);
      std::swap(b[static_cast<std::size_t>(col)],
                b[static_cast<std::size_t>(pivot)]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + col] /
                       a[static_cast<std::size_t>(col) * n + col];
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -=
            f * a[static_cast<std::size_t>(col) * n + c];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      acc -= a[static_cast<std::size_t>(r) * n + c] *
             x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] =
        acc / a[static_cast<std::size_t>(r) * n + r];
  }
  return x;
}

double mean_task_ns(const std::vector<ExecutionRecord>& rec,
                    ExecutionDecision d) {
  double acc = 0.0;
  int n = 0;
  for (const auto& r : rec) {
    if (r.decision != d) continue;
    acc += static_cast<double>(r.end_ns - r.start_ns);
    ++n;
  }
  REQUIRE(n > 0);
  return acc / n;
}

}  // namespace

TEST_CASE("sobel: flat image has zero gradient everywhere") {
  const ImageBuffer img(64, 64, 137);
  const ImageBuffer ref = sobel_reference(img);
  for (auto p : ref.pixels) CHECK(p == 0);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto run = sobel_run(img, DegreePreset::Aggressive, rt);
  for (auto p : run.image.pixels) CHECK(p == 0);
}

TEST_CASE("sobel: ratio 1.0 is bit-identical to the sequential reference") {
  const ImageBuffer img = generate_test_image(96, 5);
  Runtime rt(4, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 1.0;
  const auto run = sobel_run(img, DegreePreset::Mild, rt, tuning);
  CHECK(run.image.pixels == sobel_reference(img).pixels);
}

TEST_CASE("sobel: quality degrades from mild to aggressive") {
  const ImageBuffer img = generate_test_image(128, 9);
  const ImageBuffer ref = sobel_reference(img);
  std::map<DegreePreset, double> q;
  for (auto preset : {DegreePreset::Mild, DegreePreset::Medium,
                      DegreePreset::Aggressive}) {
    Runtime rt(2, PolicyConfig::gtb_max_buffer());
    q[preset] = psnr(ref, sobel_run(img, preset, rt).image);
    CHECK(std::isfinite(q[preset]));
  }
  CHECK(q[DegreePreset::Mild] > q[DegreePreset::Aggressive]);
  CHECK(q[DegreePreset::Mild] >= q[DegreePreset::Medium]);
  CHECK(q[DegreePreset::Medium] >= q[DegreePreset::Aggressive]);
}

TEST_CASE("sobel: degenerate inputs are rejected before spawning") {
  Runtime rt(1, PolicyConfig::agnostic());
  CHECK_THROWS_AS(sobel_run(ImageBuffer(2, 2), DegreePreset::Mild, rt),
                  std::invalid_argument);
}

TEST_CASE("sobel: the approximate body is strictly cheaper") {
  const ImageBuffer img = generate_test_image(256, 3);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 0.5;
  sobel_run(img, DegreePreset::Mild, rt, tuning);
  const auto rec = rt.records();
  CHECK(mean_task_ns(rec, ExecutionDecision::Approximate) <
        mean_task_ns(rec, ExecutionDecision::Accurate));
}

TEST_CASE("dct: ratio 1.0 matches the reference within 1e-9") {
  const ImageBuffer img = generate_test_image(64, 11);
  const DctPlanes ref = dct_reference(img);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 1.0;
  const auto run = dct_run(img, DegreePreset::Mild, rt, tuning);
  REQUIRE(run.planes.coeffs.size() == ref.coeffs.size());
  for (std::size_t i = 0; i < ref.coeffs.size(); ++i)
    CHECK(std::abs(run.planes.coeffs[i] - ref.coeffs[i]) <= 1e-9);
}

TEST_CASE("dct: a flat image reconstructs exactly from the DC band alone") {
  const ImageBuffer img(32, 32, 91);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto run = dct_run(img, DegreePreset::Aggressive, rt);
  // only the two lowest bands survive at ratio 0.1, which includes DC
  const auto recon = dct_reconstruct(run.planes);
  for (auto p : recon.pixels) CHECK(p == 91);
}

TEST_CASE("dct: dropped bands stay zero and quality is monotone") {
  const ImageBuffer img = generate_test_image(96, 2);
  const ImageBuffer ref_recon = dct_reconstruct(dct_reference(img));
  std::map<DegreePreset, double> q;
  for (auto preset : {DegreePreset::Mild, DegreePreset::Medium,
                      DegreePreset::Aggressive}) {
    Runtime rt(2, PolicyConfig::gtb_max_buffer());
    const auto run = dct_run(img, preset, rt);
    q[preset] = psnr(ref_recon, dct_reconstruct(run.planes));
    if (preset == DegreePreset::Aggressive) {
      // quota of 15 bands at ratio 0.1 is 2: bands k >= 2 are all dropped
      const auto rec = rt.records();
      int accurate = 0;
      for (const auto& r : rec)
        accurate += r.decision == ExecutionDecision::Accurate ? 1 : 0;
      CHECK(accurate == 2);
      for (int by = 0; by < run.planes.height; by += 8)
        for (int bx = 0; bx < run.planes.width; bx += 8)
          for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v)
              if (u + v >= 2) CHECK(run.planes.at(bx + u, by + v) == 0.0);
    }
  }
  CHECK(q[DegreePreset::Mild] >= q[DegreePreset::Medium]);
  CHECK(q[DegreePreset::Medium] >= q[DegreePreset::Aggressive]);
  CHECK(q[DegreePreset::Aggressive] > 10.0);  // still recognizable
}

TEST_CASE("dct: band significance is monotone and inside (0, 1)") {
  for (int k = 1; k < 15; ++k) {
    CHECK(dct_band_significance(k) < dct_band_significance(k - 1));
    CHECK(dct_band_significance(k) > 0.0);
    CHECK(dct_band_significance(k) < 1.0);
  }
}

TEST_CASE("mc: constant boundary values make every estimate exactly one") {
  McConfig cfg;
  cfg.points = 12;
  cfg.walks_per_task = 64;
  cfg.boundary = McConfig::Boundary::One;
  for (auto preset : {DegreePreset::Mild, DegreePreset::Aggressive}) {
    Runtime rt(2, PolicyConfig::gtb_max_buffer());
    const auto run = mc_run(cfg, preset, rt);
    CHECK(run.undefined_count == 0);
    for (double v : run.estimates) CHECK(v == 1.0);
  }
}

TEST_CASE("mc: ratio 1.0 reproduces the sequential reference exactly") {
  McConfig cfg;
  cfg.points = 8;
  cfg.walks_per_task = 128;
  cfg.seed = 21;
  Runtime rt(3, PolicyConfig::gtb_max_buffer());
  const auto run = mc_run(cfg, DegreePreset::Mild, rt);  // mild ratio is 1.0
  CHECK(run.estimates == mc_reference(cfg));
}

TEST_CASE("mc: estimates do not depend on scheduling") {
  McConfig cfg;
  cfg.points = 10;
  cfg.walks_per_task = 64;
  cfg.seed = 4;
  auto with_workers = [&cfg](unsigned workers) {
    Runtime rt(workers, PolicyConfig::gtb_max_buffer());
    return mc_run(cfg, DegreePreset::Aggressive, rt).estimates;
  };
  CHECK(with_workers(1) == with_workers(4));
}

TEST_CASE("mc: aggressive approximation stays bounded and runs faster") {
  McConfig cfg;
  cfg.points = 16;
  cfg.walks_per_task = 256;
  cfg.seed = 9;
  const auto ref = mc_reference(cfg);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto run = mc_run(cfg, DegreePreset::Aggressive, rt);
  CHECK(run.undefined_count == 0);
  CHECK(relative_error_pct(ref, run.estimates) < 10.0);
  const auto rec = rt.records();
  CHECK(mean_task_ns(rec, ExecutionDecision::Approximate) <
        mean_task_ns(rec, ExecutionDecision::Accurate));
}

TEST_CASE("mc: dropped points are flagged, not silently zeroed") {
  McConfig cfg;
  cfg.points = 8;
  cfg.walks_per_task = 32;
  Runtime rt(2, PolicyConfig::perforation());
  KernelTuning tuning;
  tuning.ratio_override = 0.5;
  const auto run = mc_run(cfg, DegreePreset::Mild, rt, tuning);
  CHECK(run.undefined_count == 4);
  int nans = 0;
  for (double v : run.estimates) nans += std::isnan(v) ? 1 : 0;
  CHECK(nans == run.undefined_count);
}

TEST_CASE("kmeans: single cluster at ratio 1.0 is the global mean") {
  const KmeansData data = make_gaussian_mixture(500, 8, 1, 31);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 1.0;
  const auto run = kmeans_run(data, DegreePreset::Mild, rt, tuning);
  for (int j = 0; j < data.d; ++j) {
    double mean = 0.0;
    for (int i = 0; i < data.n; ++i) mean += data.point(i)[j];
    mean /= data.n;
    CHECK(run.centroids[static_cast<std::size_t>(j)] ==
          doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("kmeans: ratio 1.0 reproduces the reference iterate-for-iterate") {
  const KmeansData data = make_gaussian_mixture(4000, 16, 4, 13);
  Runtime rt(4, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 1.0;
  const auto run = kmeans_run(data, DegreePreset::Mild, rt, tuning);
  const auto ref = kmeans_reference(data, 4 * 8);
  CHECK(run.iterations == ref.iterations);
  CHECK(run.converged);
  CHECK(run.centroids == ref.centroids);
  CHECK(run.assignment == ref.assignment);
}

TEST_CASE("kmeans: invalid cluster counts are rejected") {
  const KmeansData data = make_gaussian_mixture(16, 8, 2, 1);
  KmeansData bad = data;
  bad.k = 17;
  Runtime rt(1, PolicyConfig::agnostic());
  CHECK_THROWS_AS(kmeans_run(bad, DegreePreset::Mild, rt),
                  std::invalid_argument);
}

TEST_CASE("kmeans: an emptied cluster re-seeds from the farthest point") {
  // Three centroids for two far-apart blobs: one of them must empty out.
  KmeansData data;
  data.n = 40;
  data.d = 8;
  data.k = 3;
  data.points.resize(40 * 8);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 8; ++j)
      data.points[static_cast<std::size_t>(i) * 8 + j] =
          (i < 20 ? -50.0 : 50.0) + 0.01 * i + 0.001 * j;
  Runtime rt(2, PolicyConfig::agnostic());
  const auto run = kmeans_run(data, DegreePreset::Mild, rt);
  CHECK(run.iterations >= 1);
  // all three centroids are finite and distinct
  for (double c : run.centroids) CHECK(std::isfinite(c));
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      double diff = 0.0;
      for (int j = 0; j < 8; ++j)
        diff += std::abs(run.centroids[static_cast<std::size_t>(a) * 8 + j] -
                         run.centroids[static_cast<std::size_t>(b) * 8 + j]);
      CHECK(diff > 0.0);
    }
}

TEST_CASE("kmeans: dropped chunks contribute nothing and nothing breaks") {
  const KmeansData data = make_gaussian_mixture(3000, 16, 4, 23);
  for (const auto& policy :
       {PolicyConfig::perforation(), PolicyConfig::gtb_max_buffer()}) {
    Runtime rt(2, policy);
    KernelTuning tuning;
    tuning.ratio_override = 0.4;
    const auto run = kmeans_run(data, DegreePreset::Aggressive, rt, tuning);
    CHECK(run.iterations >= 1);
    for (double c : run.centroids) CHECK(std::isfinite(c));
    const auto counts = count_decisions(rt.records());
    if (policy.kind == PolicyConfig::Kind::Perforation)
      CHECK(counts.dropped > 0);  // perforation drops, never approximates
    else
      CHECK(counts.dropped == 0);
  }
}

TEST_CASE("kmeans: the approximate body is strictly cheaper") {
  const KmeansData data = make_gaussian_mixture(20000, 32, 4, 17);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  KernelTuning tuning;
  tuning.ratio_override = 0.5;
  kmeans_run(data, DegreePreset::Mild, rt, tuning);
  const auto rec = rt.records();
  CHECK(mean_task_ns(rec, ExecutionDecision::Approximate) <
        mean_task_ns(rec, ExecutionDecision::Accurate));
}

TEST_CASE("jacobi: identity system solves in the first accurate sweep") {
  LinearSystem sys;
  sys.n = 64;
  sys.a.assign(64 * 64, 0.0);
  sys.b.resize(64);
  for (int i = 0; i < 64; ++i) {
    sys.a[static_cast<std::size_t>(i) * 64 + i] = 1.0;
    sys.b[static_cast<std::size_t>(i)] = 3.0 + i;
  }
  for (auto preset : {DegreePreset::Mild, DegreePreset::Medium,
                      DegreePreset::Aggressive}) {
    Runtime rt(2, PolicyConfig::gtb_max_buffer());
    JacobiOptions opt;
    opt.tolerance = jacobi_preset_tolerance(preset);
    const auto run = jacobi_run(sys, opt, rt);
    CHECK(run.converged);
    CHECK(run.x == sys.b);
  }
}

TEST_CASE("jacobi: fully accurate run matches the reference sweep-for-sweep") {
  const LinearSystem sys = make_dominant_system(128, 7);
  Runtime rt(4, PolicyConfig::gtb_max_buffer());
  JacobiOptions opt;
  opt.tolerance = kJacobiNativeTolerance;
  opt.approx_sweeps = 0;
  const auto run = jacobi_run(sys, opt, rt);
  const auto ref = jacobi_reference(sys, kJacobiNativeTolerance);
  CHECK(run.converged);
  CHECK(run.sweeps == ref.sweeps);
  CHECK(run.x == ref.x);
}

TEST_CASE("jacobi: presets converge near the direct solution") {
  const LinearSystem sys = make_dominant_system(128, 42);
  REQUIRE(diagonally_dominant(sys));
  const auto exact = direct_solve(sys);
  double last_err = 0.0;
  for (auto preset : {DegreePreset::Mild, DegreePreset::Medium,
                      DegreePreset::Aggressive}) {
    Runtime rt(2, PolicyConfig::gtb_max_buffer());
    JacobiOptions opt;
    opt.tolerance = jacobi_preset_tolerance(preset);
    const auto run = jacobi_run(sys, opt, rt);
    CHECK(run.converged);
    const double err = relative_error_pct(exact, run.x);
    CHECK(err <= 10.0 * 100.0 * opt.tolerance);  // within 10x the tolerance
    CHECK(err >= last_err);
    last_err = err;
  }
}

TEST_CASE("jacobi: non-dominant systems are rejected") {
  LinearSystem sys;
  sys.n = 4;
  sys.a.assign(16, 1.0);
  sys.b.assign(4, 1.0);
  Runtime rt(1, PolicyConfig::agnostic());
  CHECK_THROWS_AS(jacobi_run(sys, JacobiOptions{}, rt), std::invalid_argument);
  CHECK_THROWS_AS(jacobi_reference(sys, 1e-5), std::invalid_argument);
}

TEST_CASE("jacobi: the dropped phase drops only out-of-band blocks") {
  const LinearSystem sys = make_dominant_system(96, 3);
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto run = jacobi_run(sys, JacobiOptions{}, rt);
  CHECK(run.converged);
  const auto rec = rt.records();
  int dropped = 0;
  for (const auto& r : rec) {
    if (r.decision == ExecutionDecision::Dropped) {
      ++dropped;
      CHECK(r.significance == 0.0);
    } else {
      CHECK(r.significance == 1.0);
    }
  }
  // 42 out-of-band partial blocks per sweep for the first five sweeps
  CHECK(dropped == 5 * 42);
}

TEST_CASE("alternating: ratio 1.0 keeps every step fully accurate") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto trace = alternating_ratio_demo(4, 1.0, rt, 18);
  for (double f : trace.step_accurate_fraction)
    CHECK(f == doctest::Approx(1.0));
}

TEST_CASE("alternating: fractions alternate exactly under max-buffer GTB") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto trace = alternating_ratio_demo(10, 0.5, rt, 64);
  REQUIRE(trace.step_accurate_fraction.size() == 10);
  for (int step = 0; step < 10; ++step) {
    const double expect = step % 2 == 0 ? 1.0 : 0.5;
    CHECK(trace.step_accurate_fraction[static_cast<std::size_t>(step)] ==
          doctest::Approx(expect));
  }
}

TEST_CASE("alternating: ratio 0 approximates whole steps without drops") {
  Runtime rt(2, PolicyConfig::gtb_max_buffer());
  const auto trace = alternating_ratio_demo(6, 0.0, rt, 18);
  for (int step = 0; step < 6; ++step) {
    const double expect = step % 2 == 0 ? 1.0 : 0.0;
    CHECK(trace.step_accurate_fraction[static_cast<std::size_t>(step)] ==
          doctest::Approx(expect));
  }
}

TEST_CASE("alternating: fewer than two steps is an error") {
  Runtime rt(1, PolicyConfig::agnostic());
  CHECK_THROWS_AS(alternating_ratio_demo(1, 0.5, rt), std::invalid_argument);
}
