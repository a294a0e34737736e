// kspace.hpp
//
// MRI-style image degradation: transform to the 2D frequency domain,
// randomly zero phase-encode lines (spectrum rows) outside a retained
// central band, reconstruct by the inverse transform and take the
// magnitude. Rows are addressed in DC-centred order; each out-of-band row
// is dropped independently with probability p_remove.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "topo/fft.hpp"
#include "topo/grid.hpp"
#include "topo/rng.hpp"

namespace topo {

struct DegradeConfig {
  int band = 8;            // retained central k-space lines
  double p_remove = 0.75;  // per-line removal probability outside the band
  std::uint64_t seed = 0;
};

inline void validate_degrade(const DegradeConfig& cfg, int height) {
  if (cfg.band < 1 || cfg.band > height)
    throw std::invalid_argument("degrade: band must be in [1, image height]");
  if (!(cfg.p_remove >= 0.0 && cfg.p_remove <= 1.0))
    throw std::invalid_argument("degrade: p_remove must be in [0, 1]");
}

/// Per-row keep mask indexed by the raw frequency row f (DC at f = 0).
/// The central band covers shifted rows [(h-band)/2, (h-band)/2 + band);
/// removal draws are made in shifted order from a fresh Rng(cfg.seed).
inline std::vector<std::uint8_t> retained_rows(int height, const DegradeConfig& cfg) {
  validate_degrade(cfg, height);
  const int start = (height - cfg.band) / 2;
  Rng rng(cfg.seed);
  std::vector<std::uint8_t> keep(height, 1);
  for (int s = 0; s < height; ++s) {
    const bool in_band = s >= start && s < start + cfg.band;
    const int f = (s + (height + 1) / 2) % height;  // unshift
    if (!in_band) keep[f] = rng.uniform() < cfg.p_remove ? 0 : 1;
  }
  return keep;
}

/// Degrades an image via the k-space line-removal model. Output has the
/// same shape, values clamped to [0, 1]. With p_remove = 0 (or a full-height
/// band) the round trip returns the input up to rounding.
inline ProbabilityGrid degrade_kspace(const ProbabilityGrid& image, const DegradeConfig& cfg) {
  validate_grid(image);
  validate_degrade(cfg, image.height);
  const int h = image.height, w = image.width;

  std::vector<Complex> spectrum(image.values.begin(), image.values.end());
  fft_2d(spectrum, h, w, false);

  const std::vector<std::uint8_t> keep = retained_rows(h, cfg);
  for (int f = 0; f < h; ++f)
    if (!keep[f])
      for (int j = 0; j < w; ++j) spectrum[static_cast<std::size_t>(f) * w + j] = Complex(0.0, 0.0);

  fft_2d(spectrum, h, w, true);

  ProbabilityGrid out(h, w);
  for (std::size_t n = 0; n < out.values.size(); ++n)
    out.values[n] = std::min(1.0, std::abs(spectrum[n]));
  return out;
}

}  // namespace topo
