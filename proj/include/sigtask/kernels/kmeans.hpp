#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "sigtask/kernels/common.hpp"
#include "sigtask/runtime.hpp"

namespace sigtask {

struct KmeansData {
  int n = 0;
  int d = 0;
  int k = 0;
  std::vector<double> points;  // n x d row-major

  const double* point(int i) const {
    return points.data() + static_cast<std::size_t>(i) * d;
  }
};

// Synthetic mixture with the cluster structure visible in the leading
// dimensions too, since the approximate distance only looks at the first
// ceil(d/8) of them.
inline KmeansData make_gaussian_mixture(int n, int d, int k,
                                        std::uint64_t seed) {
  if (n < k || k < 1 || d < 1) throw std::invalid_argument("bad mixture spec");
  KmeansData data;
  data.n = n;
  data.d = d;
  data.k = k;
  data.points.resize(static_cast<std::size_t>(n) * d);
  const int lead = (d + 7) / 8;
  std::mt19937_64 rng(mix_seed(seed, 0x6b6d65616e73ull));
  std::vector<double> centers(static_cast<std::size_t>(k) * d);
  std::uniform_real_distribution<double> tail(-5.0, 5.0);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) {
      double v;
      if (j < lead)
        v = ((c >> (j % 8)) & 1) ? 10.0 : -10.0;
      else
        v = tail(rng);
      centers[static_cast<std::size_t>(c) * d + j] = v;
    }
  }
  std::normal_distribution<double> noise(0.0, 1.5);
  for (int i = 0; i < n; ++i) {
    // Contiguous component blocks; membership is spatial, not index-striped.
    const int c = std::min(
        k - 1, static_cast<int>((static_cast<std::int64_t>(i) * k) / n));
    for (int j = 0; j < d; ++j)
      data.points[static_cast<std::size_t>(i) * d + j] =
          centers[static_cast<std::size_t>(c) * d + j] + noise(rng);
  }
  return data;
}

namespace detail {

// Deterministic spread: every (n/k)-th point seeds one centroid.
inline std::vector<double> kmeans_seed_centroids(const KmeansData& data) {
  std::vector<double> c(static_cast<std::size_t>(data.k) * data.d);
  for (int j = 0; j < data.k; ++j) {
    const int idx =
        static_cast<int>((static_cast<std::int64_t>(j) * data.n) / data.k);
    for (int t = 0; t < data.d; ++t)
      c[static_cast<std::size_t>(j) * data.d + t] = data.point(idx)[t];
  }
  return c;
}

inline int nearest_full(const double* p, const std::vector<double>& centroids,
                        int k, int d) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const double* cc = centroids.data() + static_cast<std::size_t>(c) * d;
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dd = p[j] - cc[j];
      acc += dd * dd;
    }
    if (acc < best_d) {
      best_d = acc;
      best = c;
    }
  }
  return best;
}

// Simpler distance: sum of absolute differences over the leading subset
// (one eighth) of the dimensions.
inline int nearest_subset(const double* p,
                          const std::vector<double>& centroids, int k, int d,
                          int lead) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const double* cc = centroids.data() + static_cast<std::size_t>(c) * d;
    double acc = 0.0;
    for (int j = 0; j < lead; ++j) acc += std::abs(p[j] - cc[j]);
    if (acc < best_d) {
      best_d = acc;
      best = c;
    }
  }
  return best;
}

// Membership deltas of one chunk for one iteration. Only points that switch
// clusters contribute, so settled iterations cost little beyond the distance
// evaluations.
struct KmeansChunkOut {
  std::vector<double> sum_delta;  // k x d
  std::vector<std::int64_t> count_delta;
  std::uint32_t changed = 0;
  bool accurate_run = false;
};

template <bool Accurate>
inline void kmeans_chunk(const KmeansData& data,
                         const std::vector<double>& centroids, int begin,
                         int end, std::vector<int>& assignment,
                         KmeansChunkOut& out) {
  const int lead = (data.d + 7) / 8;
  out.sum_delta.assign(static_cast<std::size_t>(data.k) * data.d, 0.0);
  out.count_delta.assign(static_cast<std::size_t>(data.k), 0);
  out.changed = 0;
  out.accurate_run = Accurate;
  for (int i = begin; i < end; ++i) {
    const double* p = data.point(i);
    const int c = Accurate
                      ? nearest_full(p, centroids, data.k, data.d)
                      : nearest_subset(p, centroids, data.k, data.d, lead);
    const int old = assignment[static_cast<std::size_t>(i)];
    if (old == c) continue;
    out.changed += 1;
    assignment[static_cast<std::size_t>(i)] = c;
    double* add = out.sum_delta.data() + static_cast<std::size_t>(c) * data.d;
    for (int j = 0; j < data.d; ++j) add[j] += p[j];
    out.count_delta[static_cast<std::size_t>(c)] += 1;
    if (old >= 0) {
      double* sub =
          out.sum_delta.data() + static_cast<std::size_t>(old) * data.d;
      for (int j = 0; j < data.d; ++j) sub[j] -= p[j];
      out.count_delta[static_cast<std::size_t>(old)] -= 1;
    }
  }
}

// Running per-cluster totals owned by the master between barriers.
struct KmeansState {
  std::vector<double> sums;            // k x d
  std::vector<std::int64_t> counts;    // k
};

// Folds the chunk deltas in (deterministic) chunk order and rebuilds the
// centroids. An empty cluster is re-seeded from the point farthest from its
// assigned centroid.
inline void kmeans_update_centroids(const KmeansData& data,
                                    const std::vector<KmeansChunkOut>& chunks,
                                    const std::vector<int>& assignment,
                                    KmeansState& state,
                                    std::vector<double>& centroids) {
  for (const auto& ch : chunks) {
    for (std::size_t i = 0; i < state.sums.size(); ++i)
      state.sums[i] += ch.sum_delta[i];
    for (int c = 0; c < data.k; ++c)
      state.counts[static_cast<std::size_t>(c)] +=
          ch.count_delta[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < data.k; ++c) {
    if (state.counts[static_cast<std::size_t>(c)] <= 0) continue;
    const double inv =
        1.0 / static_cast<double>(state.counts[static_cast<std::size_t>(c)]);
    for (int j = 0; j < data.d; ++j)
      centroids[static_cast<std::size_t>(c) * data.d + j] =
          state.sums[static_cast<std::size_t>(c) * data.d + j] * inv;
  }
  for (int c = 0; c < data.k; ++c) {
    if (state.counts[static_cast<std::size_t>(c)] > 0) continue;
    int far_idx = 0;
    double far_d = -1.0;
    for (int i = 0; i < data.n; ++i) {
      const int a = assignment[static_cast<std::size_t>(i)];
      if (a < 0 || state.counts[static_cast<std::size_t>(a)] <= 0) continue;
      const double* p = data.point(i);
      const double* cc =
          centroids.data() + static_cast<std::size_t>(a) * data.d;
      double acc = 0.0;
      for (int j = 0; j < data.d; ++j) {
        const double dd = p[j] - cc[j];
        acc += dd * dd;
      }
      if (acc > far_d) {
        far_d = acc;
        far_idx = i;
      }
    }
    for (int j = 0; j < data.d; ++j)
      centroids[static_cast<std::size_t>(c) * data.d + j] =
          data.point(far_idx)[j];
  }
}

}  // namespace detail

struct KmeansResult {
  std::vector<double> centroids;
  std::vector<int> assignment;
  int iterations = 0;
  bool converged = false;
  double wall_secs = 0.0;
};

inline constexpr int kKmeansMaxIterations = 500;

// Sequential accurate clustering with the same chunked accumulation order as
// the task version, so a ratio-1.0 run reproduces it exactly.
inline KmeansResult kmeans_reference(const KmeansData& data,
                                     int chunk_count) {
  KmeansResult res;
  res.centroids = detail::kmeans_seed_centroids(data);
  res.assignment.assign(static_cast<std::size_t>(data.n), -1);
  detail::KmeansState state;
  state.sums.assign(static_cast<std::size_t>(data.k) * data.d, 0.0);
  state.counts.assign(static_cast<std::size_t>(data.k), 0);
  std::vector<detail::KmeansChunkOut> chunks(
      static_cast<std::size_t>(chunk_count));
  const int chunk_size = (data.n + chunk_count - 1) / chunk_count;
  for (int iter = 1; iter <= kKmeansMaxIterations; ++iter) {
    res.iterations = iter;
    for (int ci = 0; ci < chunk_count; ++ci) {
      const int begin = ci * chunk_size;
      const int end = std::min(data.n, begin + chunk_size);
      auto& out = chunks[static_cast<std::size_t>(ci)];
      if (begin >= end) {
        out.sum_delta.assign(static_cast<std::size_t>(data.k) * data.d, 0.0);
        out.count_delta.assign(static_cast<std::size_t>(data.k), 0);
        out.changed = 0;
        out.accurate_run = false;
        continue;
      }
      detail::kmeans_chunk<true>(data, res.centroids, begin, end,
                                 res.assignment, out);
    }
    std::uint64_t changed = 0;
    for (const auto& ch : chunks)
      if (ch.accurate_run) changed += ch.changed;
    detail::kmeans_update_centroids(data, chunks, res.assignment, state,
                                    res.centroids);
    if (static_cast<double>(changed) < data.n / 1000.0) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Task-parallel clustering: per iteration one task per point chunk, all at
// one significance value. Approximate chunks assign with the subset distance
// and still feed the centroid update; only accurately processed chunks count
// toward the convergence test.
inline KmeansResult kmeans_run(const KmeansData& data, DegreePreset preset,
                               Runtime& rt, KernelTuning tuning = {}) {
  if (data.k > data.n) throw std::invalid_argument("k exceeds point count");
  if (data.k < 1) throw std::invalid_argument("k must be positive");
  const double ratio =
      tuning.ratio_override.value_or(kmeans_preset_ratio(preset));
  const double sig = tuning.significance_override.value_or(0.5);

  const int chunk_count = static_cast<int>(rt.worker_count()) * 8;
  const int chunk_size = (data.n + chunk_count - 1) / chunk_count;

  KmeansResult res;
  res.centroids = detail::kmeans_seed_centroids(data);
  res.assignment.assign(static_cast<std::size_t>(data.n), -1);
  detail::KmeansState state;
  state.sums.assign(static_cast<std::size_t>(data.k) * data.d, 0.0);
  state.counts.assign(static_cast<std::size_t>(data.k), 0);
  std::vector<detail::KmeansChunkOut> chunks(
      static_cast<std::size_t>(chunk_count));

  const RegionId points_region = RegionId::token(1);
  const RegionId centroids_region = RegionId::token(2);
  auto chunk_region = [](int ci) {
    return RegionId::token(0x400 + static_cast<std::uint64_t>(ci));
  };

  const KmeansData* dp = &data;
  std::vector<double>* centroids = &res.centroids;
  std::vector<int>* assignment = &res.assignment;

  const GroupId g = rt.init_group("kmeans", ratio);
  const std::uint64_t t0 = now_ns();
  for (int iter = 1; iter <= kKmeansMaxIterations; ++iter) {
    res.iterations = iter;
    // Reset every chunk output up front: a dropped task runs no body and
    // must contribute an empty delta, not last iteration's buffers.
    for (auto& ch : chunks) {
      ch.sum_delta.assign(static_cast<std::size_t>(data.k) * data.d, 0.0);
      ch.count_delta.assign(static_cast<std::size_t>(data.k), 0);
      ch.changed = 0;
      ch.accurate_run = false;
    }
    for (int ci = 0; ci < chunk_count; ++ci) {
      const int begin = ci * chunk_size;
      const int end = std::min(data.n, begin + chunk_size);
      detail::KmeansChunkOut* out = &chunks[static_cast<std::size_t>(ci)];
      if (begin >= end) continue;
      const RegionId inputs[] = {points_region, centroids_region};
      const RegionId outputs[] = {chunk_region(ci)};
      rt.spawn(
          g, Significance(sig),
          [dp, centroids, assignment, begin, end, out] {
            detail::kmeans_chunk<true>(*dp, *centroids, begin, end,
                                       *assignment, *out);
          },
          [dp, centroids, assignment, begin, end, out] {
            detail::kmeans_chunk<false>(*dp, *centroids, begin, end,
                                        *assignment, *out);
          },
          inputs, outputs);
    }
    rt.wait_group(g);
    std::uint64_t changed = 0;
    for (const auto& ch : chunks)
      if (ch.accurate_run) changed += ch.changed;
    detail::kmeans_update_centroids(data, chunks, res.assignment, state,
                                    res.centroids);
    if (static_cast<double>(changed) < data.n / 1000.0) {
      res.converged = true;
      break;
    }
  }
  res.wall_secs = static_cast<double>(now_ns() - t0) * 1e-9;
  return res;
}

}  // namespace sigtask
