// phantom.hpp
//
// Synthetic annulus phantoms: a bright ring on a darker background with
// additive Gaussian noise, plus the ground-truth ring mask. The label is
// checked against the brute-force oracle; a generated phantom always has
// exactly one component with one hole.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "topo/grid.hpp"
#include "topo/oracle.hpp"
#include "topo/rng.hpp"

namespace topo {

struct Phantom {
  ProbabilityGrid image;
  BinaryMask label;
};

struct AnnulusStyle {
  double ring_intensity = 0.8;
  double interior_intensity = 0.4;
  double exterior_intensity = 0.2;
  double noise_sigma = 0.05;
};

/// Generates an annulus phantom. The label marks pixels whose centre lies
/// at distance [r_inner, r_outer] from `center` (row, col coordinates).
/// Throws when the radii are out of range or when the resulting mask does
/// not have (beta_0, beta_1) = (1, 1) under the oracle.
inline Phantom make_annulus(int h, int w, double center_i, double center_j, double r_inner,
                            double r_outer, std::uint64_t seed, const AnnulusStyle& style = {}) {
  if (h <= 0 || w <= 0) throw std::invalid_argument("make_annulus: empty grid");
  if (!(r_inner > 0.0 && r_inner < r_outer && r_outer < std::min(h, w) / 2.0))
    throw std::invalid_argument("make_annulus: need 0 < r_inner < r_outer < min(h, w)/2");

  Phantom phantom{ProbabilityGrid(h, w), BinaryMask(h, w)};
  Rng rng(seed);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double di = (i + 0.5) - center_i;
      const double dj = (j + 0.5) - center_j;
      const double dist = std::sqrt(di * di + dj * dj);
      const bool on_ring = dist >= r_inner && dist <= r_outer;
      phantom.label.at(i, j) = on_ring ? 1 : 0;
      double intensity = style.exterior_intensity;
      if (on_ring)
        intensity = style.ring_intensity;
      else if (dist < r_inner)
        intensity = style.interior_intensity;
      phantom.image.at(i, j) = std::clamp(intensity + rng.normal(0.0, style.noise_sigma), 0.0, 1.0);
    }

  if (betti0_bruteforce(phantom.label) != 1 || betti1_bruteforce(phantom.label) != 1)
    throw std::runtime_error("make_annulus: label is not a single ring (check radii vs. pixel grid)");
  return phantom;
}

}  // namespace topo
