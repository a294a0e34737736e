// oracle.hpp
//
// Brute-force topology reference for binary masks: connected components by
// union-find over 8-neighbourhoods, Euler characteristic by direct counting
// of vertices, edges and squares of the union of closed unit squares, and
// beta_1 = beta_0 - chi. Shares no machinery with the barcode computation;
// it exists to check it. Quadratic-ish and only meant for small grids.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "topo/grid.hpp"

namespace topo {

namespace oracle_detail {

inline int uf_find(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

inline void uf_union(std::vector<int>& parent, int x, int y) {
  x = uf_find(parent, x);
  y = uf_find(parent, y);
  if (x != y) parent[std::max(x, y)] = std::min(x, y);
}

}  // namespace oracle_detail

/// Number of 8-connected foreground components (diagonally touching pixels
/// count as neighbours).
inline int betti0_bruteforce(const BinaryMask& mask) {
  const int h = mask.height, w = mask.width;
  std::vector<int> parent(static_cast<std::size_t>(h) * w);
  for (std::size_t n = 0; n < parent.size(); ++n) parent[n] = static_cast<int>(n);

  auto id = [w](int i, int j) { return i * w + j; };
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      // right, down-left, down, down-right cover every neighbour pair once
      if (j + 1 < w && mask.at(i, j + 1)) oracle_detail::uf_union(parent, id(i, j), id(i, j + 1));
      if (i + 1 < h) {
        if (j > 0 && mask.at(i + 1, j - 1)) oracle_detail::uf_union(parent, id(i, j), id(i + 1, j - 1));
        if (mask.at(i + 1, j)) oracle_detail::uf_union(parent, id(i, j), id(i + 1, j));
        if (j + 1 < w && mask.at(i + 1, j + 1)) oracle_detail::uf_union(parent, id(i, j), id(i + 1, j + 1));
      }
    }

  int components = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      if (mask.at(i, j) && oracle_detail::uf_find(parent, id(i, j)) == id(i, j)) ++components;
  return components;
}

/// Euler characteristic chi = V - E + F of the union of the closed unit
/// squares of the foreground pixels, with vertices and edges shared between
/// neighbouring pixels counted once.
inline int euler_characteristic(const BinaryMask& mask) {
  const int h = mask.height, w = mask.width;
  // vertex (i, j) at lattice point; horizontal edge (i, j)-(i, j+1);
  // vertical edge (i, j)-(i+1, j)
  std::vector<std::uint8_t> vert(static_cast<std::size_t>(h + 1) * (w + 1), 0);
  std::vector<std::uint8_t> hedge(static_cast<std::size_t>(h + 1) * w, 0);
  std::vector<std::uint8_t> vedge(static_cast<std::size_t>(h) * (w + 1), 0);

  int faces = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      ++faces;
      vert[static_cast<std::size_t>(i) * (w + 1) + j] = 1;
      vert[static_cast<std::size_t>(i) * (w + 1) + j + 1] = 1;
      vert[static_cast<std::size_t>(i + 1) * (w + 1) + j] = 1;
      vert[static_cast<std::size_t>(i + 1) * (w + 1) + j + 1] = 1;
      hedge[static_cast<std::size_t>(i) * w + j] = 1;
      hedge[static_cast<std::size_t>(i + 1) * w + j] = 1;
      vedge[static_cast<std::size_t>(i) * (w + 1) + j] = 1;
      vedge[static_cast<std::size_t>(i) * (w + 1) + j + 1] = 1;
    }

  int v = 0, e = 0;
  for (auto x : vert) v += x;
  for (auto x : hedge) e += x;
  for (auto x : vedge) e += x;
  return v - e + faces;
}

/// Number of independent loops: beta_0 - chi (non-negative for 2D masks).
inline int betti1_bruteforce(const BinaryMask& mask) {
  return betti0_bruteforce(mask) - euler_characteristic(mask);
}

struct BettiPoint {
  double p = 0.0;
  int betti0 = 0;
  int betti1 = 0;

  bool operator==(const BettiPoint& o) const {
    return p == o.p && betti0 == o.betti0 && betti1 == o.betti1;
  }
};

/// Both Betti numbers of binarize(grid, p) at every threshold where the mask
/// can change: p = 1 - v for each distinct pixel value v, plus p = 1.
/// Sorted by p ascending.
inline std::vector<BettiPoint> betti_curve(const ProbabilityGrid& grid) {
  validate_grid(grid);
  std::vector<double> thresholds;
  thresholds.reserve(grid.values.size() + 1);
  for (double v : grid.values) thresholds.push_back(1.0 - v);
  thresholds.push_back(1.0);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<BettiPoint> curve;
  curve.reserve(thresholds.size());
  for (double p : thresholds) {
    const BinaryMask mask = binarize(grid, p);
    const int b0 = betti0_bruteforce(mask);
    curve.push_back({p, b0, b0 - euler_characteristic(mask)});
  }
  return curve;
}

}  // namespace topo
