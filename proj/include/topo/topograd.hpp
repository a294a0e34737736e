// topograd.hpp
//
// Pixelwise gradients of a topological prior over a probability grid.
//
// The beta_1 = 1 procedure: for k iterations, recompute the barcode of a
// working copy, take the most persistent 1-dimensional bar, and extend it
// at both ends. The birth end is extended by setting the pixel whose value
// realises 1 - p_birth to 1 (gradient -1); the death end by setting the
// pixel realising 1 - p_death to 0 (gradient +1). An end is skipped when
// the bar already reaches within eps of the corresponding boundary of the
// filtration. The general form runs the same lengthening on the top
// beta_d* bars of every dimension in the prior and, optionally, the
// sign-reversed shortening on the most persistent surplus bar.
//
// The input grid is never mutated; only the working copy is.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "topo/complex.hpp"
#include "topo/grid.hpp"
#include "topo/persistence.hpp"

namespace topo {

enum class PlacementMode {
  paired_cell,  // gradient lands on the determining pixel of the bar-end cell
  value_match,  // gradient lands on every pixel matching the endpoint value (tol 1e-12)
};

struct TopoGradConfig {
  int k = 5;
  double eps = 0.01;
  PlacementMode placement = PlacementMode::paired_cell;
};

/// Desired Betti numbers per dimension. With penalize_extra set, the most
/// persistent bar beyond the desired count is also actively shortened.
struct TopologyPrior {
  std::map<int, int> desired;  // dimension -> beta_d*
  bool penalize_extra = false;
};

inline TopologyPrior ring_prior(bool penalize_extra = false) {
  return TopologyPrior{{{0, 1}, {1, 1}}, penalize_extra};
}

inline void validate_config(const TopoGradConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("topograd: k must be >= 1");
  if (!(cfg.eps > 0.0 && cfg.eps < 0.5)) throw std::invalid_argument("topograd: eps must be in (0, 0.5)");
}

inline void validate_prior(const TopologyPrior& prior) {
  if (prior.desired.empty()) throw std::invalid_argument("topology prior specifies no dimension");
  for (const auto& [d, count] : prior.desired) {
    if (d != 0 && d != 1) throw std::invalid_argument("topology prior supports dimensions 0 and 1 only");
    if (count < 0) throw std::invalid_argument("desired Betti number must be non-negative");
    if (d == 0 && count < 1) throw std::invalid_argument("desired beta_0 must be >= 1");
  }
}

namespace topograd_detail {

const double kValueMatchTol = 1e-12;

/// Sets every selected pixel to `fill` in the working copy and writes `g`
/// into the gradient map. Returns true when at least one pixel changed.
inline bool place(ProbabilityGrid& work, GradientMap& grad, const Cell& end_cell,
                  double endpoint_value, double fill, double g, PlacementMode mode) {
  bool changed = false;
  if (mode == PlacementMode::paired_cell) {
    const auto [i, j] = determining_pixel(end_cell, work);
    if (work.at(i, j) != fill) changed = true;
    work.at(i, j) = fill;
    grad.at(i, j) = g;
  } else {
    for (int i = 0; i < work.height; ++i)
      for (int j = 0; j < work.width; ++j)
        if (std::fabs(work.at(i, j) - endpoint_value) <= kValueMatchTol) {
          if (work.at(i, j) != fill) changed = true;
          work.at(i, j) = fill;
          grad.at(i, j) = g;
        }
  }
  return changed;
}

/// Lengthening step on one bar: birth end toward 0, death end toward 1.
inline bool lengthen(ProbabilityGrid& work, GradientMap& grad, const Bar& bar, double eps,
                     PlacementMode mode) {
  bool changed = false;
  if (bar.birth > eps)
    changed |= place(work, grad, bar.creator, 1.0 - bar.birth, 1.0, -1.0, mode);
  if (bar.death < 1.0 - eps && bar.destroyer)
    changed |= place(work, grad, *bar.destroyer, 1.0 - bar.death, 0.0, +1.0, mode);
  return changed;
}

/// Sign-reversed step on a surplus bar: delay the birth, advance the death.
inline bool shorten(ProbabilityGrid& work, GradientMap& grad, const Bar& bar, PlacementMode mode) {
  bool changed = false;
  changed |= place(work, grad, bar.creator, 1.0 - bar.birth, 0.0, +1.0, mode);
  if (bar.destroyer)
    changed |= place(work, grad, *bar.destroyer, 1.0 - bar.death, 1.0, -1.0, mode);
  return changed;
}

}  // namespace topograd_detail

/// The beta_1 = 1 gradient. Returns a map with entries in {-1, 0, +1};
/// all zeros when no positive-persistence 1-dimensional bar exists.
inline GradientMap topo_grad_beta1(const ProbabilityGrid& grid, const TopoGradConfig& cfg) {
  validate_grid(grid);
  validate_config(cfg);
  ProbabilityGrid work = grid;
  GradientMap grad(grid.height, grid.width);
  for (int t = 0; t < cfg.k; ++t) {
    const Barcode barcode = compute_barcode(build_complex(work));
    const auto bar = longest_bar(barcode, 1, 1);
    if (!bar) break;  // nothing to act on; keep what was accumulated
    if (!topograd_detail::lengthen(work, grad, *bar, cfg.eps, cfg.placement))
      break;  // both ends already within eps; further iterations are no-ops
  }
  return grad;
}

/// Gradient for an arbitrary prior. Per iteration the top beta_d* bars of
/// every requested dimension are lengthened; with penalize_extra the next
/// bar (rank beta_d* + 1) is shortened instead. The essential component bar
/// is never shortened. With prior {1: 1} and no penalty this reduces to
/// topo_grad_beta1.
inline GradientMap topo_grad_general(const ProbabilityGrid& grid, const TopologyPrior& prior,
                                     const TopoGradConfig& cfg) {
  validate_grid(grid);
  validate_config(cfg);
  validate_prior(prior);
  ProbabilityGrid work = grid;
  GradientMap grad(grid.height, grid.width);
  for (int t = 0; t < cfg.k; ++t) {
    const Barcode barcode = compute_barcode(build_complex(work));
    bool changed = false;
    for (const auto& [d, desired] : prior.desired) {
      for (int rank = 1; rank <= desired; ++rank) {
        const auto bar = longest_bar(barcode, d, rank);
        if (!bar) break;
        changed |= topograd_detail::lengthen(work, grad, *bar, cfg.eps, cfg.placement);
      }
      if (prior.penalize_extra) {
        const auto surplus = longest_bar(barcode, d, desired + 1);
        if (surplus && !surplus->essential)
          changed |= topograd_detail::shorten(work, grad, *surplus, cfg.placement);
      }
    }
    if (!changed) break;
  }
  return grad;
}

/// One explicit gradient-descent step on the grid itself:
/// S' = clamp(S - eta * G, 0, 1).
inline ProbabilityGrid apply_gradient_step(const ProbabilityGrid& grid, const GradientMap& grad,
                                           double eta) {
  if (grid.height != grad.height || grid.width != grad.width)
    throw std::invalid_argument("apply_gradient_step: shape mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("apply_gradient_step: eta must be positive");
  ProbabilityGrid out = grid;
  for (std::size_t n = 0; n < out.values.size(); ++n)
    out.values[n] = std::clamp(out.values[n] - eta * grad.values[n], 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Gradient map files: dense CSV (same layout as grids, signed floats) and a
// sparse three-column format "i,j,g" listing the nonzero entries.
// ---------------------------------------------------------------------------

inline void save_gradient_csv(const std::string& path, const GradientMap& grad) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gradient file: " + path);
  char buf[40];
  for (int i = 0; i < grad.height; ++i) {
    for (int j = 0; j < grad.width; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", grad.at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline void save_gradient_sparse(const std::string& path, const GradientMap& grad) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gradient file: " + path);
  char buf[64];
  for (int i = 0; i < grad.height; ++i)
    for (int j = 0; j < grad.width; ++j)
      if (grad.at(i, j) != 0.0) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", i, j, grad.at(i, j));
        out << buf;
      }
}

}  // namespace topo
