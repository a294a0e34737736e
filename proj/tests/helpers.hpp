// helpers.hpp
//
// Shared fixtures for the test suites: canonical small grids and seeded
// annulus probability maps with optional defects.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "topo/grid.hpp"
#include "topo/oracle.hpp"
#include "topo/rng.hpp"

namespace topo::testing {

inline ProbabilityGrid grid_from(const std::vector<std::vector<double>>& rows) {
  ProbabilityGrid g(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < g.height; ++i)
    for (int j = 0; j < g.width; ++j) g.at(i, j) = rows[i][j];
  return g;
}

/// 3x3 ring of eight 0.9 pixels around one 0.1 centre. The canonical
/// example: barcode has the essential component bar (0.1, 1.0) and one
/// 1-dimensional bar (0.1, 0.9).
inline ProbabilityGrid ring3x3() {
  return grid_from({{0.9, 0.9, 0.9}, {0.9, 0.1, 0.9}, {0.9, 0.9, 0.9}});
}

/// 3x3 ring with ring pixels 1 and centre 0: both bar ends already span the
/// whole filtration.
inline ProbabilityGrid perfect_ring3x3() {
  return grid_from({{1, 1, 1}, {1, 0, 1}, {1, 1, 1}});
}

inline ProbabilityGrid uniform_grid(int h, int w, double v) { return ProbabilityGrid(h, w, v); }

/// Random grid with values drawn from a finite set.
inline ProbabilityGrid random_quantized_grid(int h, int w, const std::vector<double>& levels,
                                             std::uint64_t seed) {
  ProbabilityGrid g(h, w);
  Rng rng(seed);
  for (double& v : g.values) v = levels[rng.below(levels.size())];
  return g;
}

inline std::vector<double> eleven_levels() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

inline BinaryMask random_mask(int h, int w, double density, std::uint64_t seed) {
  BinaryMask m(h, w);
  Rng rng(seed);
  for (auto& v : m.values) v = rng.uniform() < density ? 1 : 0;
  return m;
}

struct AnnulusMapOpts {
  double ring = 0.85;
  double background = 0.12;
  double jitter = 0.04;     // uniform +- jitter on every pixel
  int gap_pixels = 0;       // ring pixels knocked down to gap_value
  double gap_value = 0.3;
  int clutter_pixels = 0;   // background pixels raised to clutter_value
  double clutter_value = 0.62;
};

/// Seeded annulus probability map on an h x w grid with optional ring gap
/// and background clutter. Geometry: centred ring with radii ~ (h/6, h/3).
inline ProbabilityGrid annulus_prob_map(int h, int w, std::uint64_t seed,
                                        const AnnulusMapOpts& opts = {}) {
  Rng rng(seed);
  const double ci = h / 2.0 + rng.uniform(-1.0, 1.0);
  const double cj = w / 2.0 + rng.uniform(-1.0, 1.0);
  const double r_in = h / 6.0 + rng.uniform(-0.5, 0.5);
  const double r_out = h / 3.2 + rng.uniform(-0.5, 0.5);

  ProbabilityGrid g(h, w);
  std::vector<std::pair<int, int>> ring_pixels;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double di = i + 0.5 - ci, dj = j + 0.5 - cj;
      const double dist = std::sqrt(di * di + dj * dj);
      const bool on_ring = dist >= r_in && dist <= r_out;
      if (on_ring) ring_pixels.emplace_back(i, j);
      const double base = on_ring ? opts.ring : opts.background;
      g.at(i, j) = std::clamp(base + rng.uniform(-opts.jitter, opts.jitter), 0.0, 1.0);
    }

  if (opts.gap_pixels > 0 && !ring_pixels.empty()) {
    // knock out a contiguous angular sector of the ring
    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    std::vector<std::pair<double, std::pair<int, int>>> by_angle;
    for (const auto& [i, j] : ring_pixels) {
      double ang = std::atan2(i + 0.5 - ci, j + 0.5 - cj) - theta;
      while (ang < -3.14159265358979323846) ang += 2.0 * 3.14159265358979323846;
      while (ang > 3.14159265358979323846) ang -= 2.0 * 3.14159265358979323846;
      by_angle.push_back({std::fabs(ang), {i, j}});
    }
    std::sort(by_angle.begin(), by_angle.end());
    for (int n = 0; n < opts.gap_pixels && n < static_cast<int>(by_angle.size()); ++n)
      g.at(by_angle[n].second.first, by_angle[n].second.second) = opts.gap_value;
  }

  for (int n = 0; n < opts.clutter_pixels; ++n) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int i = static_cast<int>(rng.below(h));
      const int j = static_cast<int>(rng.below(w));
      const double di = i + 0.5 - ci, dj = j + 0.5 - cj;
      const double dist = std::sqrt(di * di + dj * dj);
      if (dist > r_out + 2.0 || dist < r_in - 2.0) {
        g.at(i, j) = opts.clutter_value;
        break;
      }
    }
  }
  return g;
}

}  // namespace topo::testing
