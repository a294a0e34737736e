// morphology.hpp
//
// Binary morphological closing with a discrete disk. Dilation runs on a
// canvas padded by the radius so the operation matches the infinite-plane
// definition exactly; closing is then idempotent.

#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "topo/grid.hpp"

namespace topo {

/// Offsets of the discrete disk: all (di, dj) with di^2 + dj^2 <= r^2.
inline std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offsets;
  for (int di = -radius; di <= radius; ++di)
    for (int dj = -radius; dj <= radius; ++dj)
      if (di * di + dj * dj <= radius * radius) offsets.emplace_back(di, dj);
  return offsets;
}

/// Morphological closing: dilation followed by erosion with a circular
/// structuring element of the given radius.
inline BinaryMask binary_closure(const BinaryMask& mask, int radius = 3) {
  if (radius < 1) throw std::invalid_argument("binary_closure: radius must be >= 1");
  const int h = mask.height, w = mask.width, r = radius;
  const auto offsets = disk_offsets(radius);

  BinaryMask dilated(h + 2 * r, w + 2 * r);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      if (mask.at(i, j))
        for (const auto& [di, dj] : offsets) dilated.at(i + r + di, j + r + dj) = 1;

  BinaryMask out(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      bool all = true;
      for (const auto& [di, dj] : offsets) {
        const int ii = i + r + di, jj = j + r + dj;
        if (ii < 0 || ii >= dilated.height || jj < 0 || jj >= dilated.width || !dilated.at(ii, jj)) {
          all = false;
          break;
        }
      }
      out.at(i, j) = all ? 1 : 0;
    }
  return out;
}

}  // namespace topo
