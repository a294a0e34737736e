// complex.hpp
//
// Filtered cubical complexes of 2D probability grids.
//
// Cells live on the doubled grid of size (2H+1) x (2W+1): the pixel (i, j)
// is the 2-cell at (2i+1, 2j+1), cells with both coordinates even are
// vertices, mixed parity gives edges. The dimension of a cell (a, b) is
// (a mod 2) + (b mod 2).
//
// A pixel cell carries filtration value 1 - S[i,j]; every lower-dimensional
// cell carries the minimum filtration over the pixels containing it. Under
// this construction a face enters the filtration no later than any of its
// cofaces, and two pixels that touch only at a corner become connected
// through the shared vertex as soon as either pixel enters.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "topo/grid.hpp"

namespace topo {

/// A cell of the doubled grid; (a, b) with 0 <= a <= 2H, 0 <= b <= 2W.
struct Cell {
  int a = 0;
  int b = 0;

  int dimension() const { return (a & 1) + (b & 1); }

  bool operator==(const Cell& o) const { return a == o.a && b == o.b; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
  bool operator<(const Cell& o) const { return a != o.a ? a < o.a : b < o.b; }
};

/// Pixel cell for pixel (i, j).
inline Cell pixel_cell(int i, int j) { return Cell{2 * i + 1, 2 * j + 1}; }

/// Writes the faces of `cell` into `out` and returns their count (0, 2 or 4).
/// Faces are obtained by rounding each odd coordinate to its two even
/// neighbours; they always stay inside the doubled grid.
inline int cell_faces(const Cell& cell, std::array<Cell, 4>& out) {
  int n = 0;
  if (cell.a & 1) {
    out[n++] = Cell{cell.a - 1, cell.b};
    out[n++] = Cell{cell.a + 1, cell.b};
  }
  if (cell.b & 1) {
    out[n++] = Cell{cell.a, cell.b - 1};
    out[n++] = Cell{cell.a, cell.b + 1};
  }
  return n;
}

namespace detail {

/// Iterates the pixels incident to a cell: row range from the a coordinate,
/// column range from b. 1, 2 or 4 pixels depending on parity and boundary.
template <typename F>
inline void for_each_incident_pixel(const Cell& cell, int grid_h, int grid_w, F&& f) {
  int i0, i1, j0, j1;
  if (cell.a & 1) {
    i0 = i1 = (cell.a - 1) / 2;
  } else {
    i0 = cell.a / 2 - 1;
    i1 = cell.a / 2;
  }
  if (cell.b & 1) {
    j0 = j1 = (cell.b - 1) / 2;
  } else {
    j0 = cell.b / 2 - 1;
    j1 = cell.b / 2;
  }
  for (int i = std::max(i0, 0); i <= std::min(i1, grid_h - 1); ++i)
    for (int j = std::max(j0, 0); j <= std::min(j1, grid_w - 1); ++j) f(i, j);
}

}  // namespace detail

/// Filtration value of a cell: min over incident pixels of 1 - S.
inline double cell_filtration(const Cell& cell, const ProbabilityGrid& grid) {
  double best = 2.0;
  detail::for_each_incident_pixel(cell, grid.height, grid.width, [&](int i, int j) {
    best = std::min(best, 1.0 - grid.at(i, j));
  });
  return best;
}

/// The incident pixel with maximal S (i.e. minimal filtration); ties broken
/// by the lexicographically smallest (i, j). For a pixel cell this is the
/// pixel itself.
inline std::pair<int, int> determining_pixel(const Cell& cell, const ProbabilityGrid& grid) {
  int bi = -1, bj = -1;
  double best = -1.0;
  detail::for_each_incident_pixel(cell, grid.height, grid.width, [&](int i, int j) {
    if (grid.at(i, j) > best) {
      best = grid.at(i, j);
      bi = i;
      bj = j;
    }
  });
  return {bi, bj};
}

/// All cells of the doubled grid in a fixed total order (the filtration):
/// sorted by (filtration value, dimension, a, b). Positions index into this
/// order; `position_of` inverts it.
class FilteredComplex {
 public:
  /// Assembles a complex from an explicit cell order. Validates shapes and
  /// that the order is a permutation of the full doubled grid; ordering
  /// validity (faces before cofaces) is checked by compute_barcode.
  FilteredComplex(int grid_h, int grid_w, std::vector<Cell> order, std::vector<double> filtration)
      : grid_h_(grid_h), grid_w_(grid_w), cells_h_(2 * grid_h + 1), cells_w_(2 * grid_w + 1),
        order_(std::move(order)), filt_(std::move(filtration)) {
    if (grid_h_ <= 0 || grid_w_ <= 0)
      throw std::invalid_argument("complex requires a non-empty grid");
    const std::size_t n = static_cast<std::size_t>(cells_h_) * cells_w_;
    if (order_.size() != n || filt_.size() != n)
      throw std::invalid_argument("complex cell order must cover the doubled grid exactly");
    position_.assign(n, -1);
    for (std::size_t pos = 0; pos < n; ++pos) {
      const Cell& c = order_[pos];
      if (c.a < 0 || c.a >= cells_h_ || c.b < 0 || c.b >= cells_w_)
        throw std::invalid_argument("cell outside the doubled grid");
      auto& slot = position_[pack(c)];
      if (slot != -1) throw std::invalid_argument("duplicate cell in complex order");
      slot = static_cast<std::int32_t>(pos);
    }
  }

  int grid_height() const { return grid_h_; }
  int grid_width() const { return grid_w_; }
  std::size_t size() const { return order_.size(); }

  const Cell& cell(std::size_t pos) const { return order_[pos]; }
  double filtration(std::size_t pos) const { return filt_[pos]; }
  int dimension(std::size_t pos) const { return order_[pos].dimension(); }

  std::int32_t position_of(const Cell& c) const { return position_[pack(c)]; }

 private:
  std::size_t pack(const Cell& c) const {
    return static_cast<std::size_t>(c.a) * cells_w_ + c.b;
  }

  int grid_h_, grid_w_;
  int cells_h_, cells_w_;
  std::vector<Cell> order_;
  std::vector<double> filt_;
  std::vector<std::int32_t> position_;
};

/// Builds the filtered cubical complex of a probability grid.
/// The result has (2H+1)(2W+1) cells ordered by (filtration, dimension,
/// index pair), which puts every face before its cofaces.
inline FilteredComplex build_complex(const ProbabilityGrid& grid) {
  validate_grid(grid);
  const int ch = 2 * grid.height + 1;
  const int cw = 2 * grid.width + 1;
  const std::size_t n = static_cast<std::size_t>(ch) * cw;

  std::vector<Cell> cells(n);
  std::vector<double> filt(n);
  std::size_t idx = 0;
  for (int a = 0; a < ch; ++a)
    for (int b = 0; b < cw; ++b, ++idx) {
      cells[idx] = Cell{a, b};
      filt[idx] = cell_filtration(cells[idx], grid);
    }

  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (filt[x] != filt[y]) return filt[x] < filt[y];
    const int dx = cells[x].dimension(), dy = cells[y].dimension();
    if (dx != dy) return dx < dy;
    return cells[x] < cells[y];
  });

  std::vector<Cell> order(n);
  std::vector<double> ofilt(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    order[pos] = cells[perm[pos]];
    ofilt[pos] = filt[perm[pos]];
  }
  return FilteredComplex(grid.height, grid.width, std::move(order), std::move(ofilt));
}

}  // namespace topo
