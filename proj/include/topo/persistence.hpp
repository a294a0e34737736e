// persistence.hpp
//
// Persistence barcodes of filtered cubical complexes over the two-element
// field. Degree-0 pairs come from union-find over the edges in filtration
// order (elder rule: the younger component dies); degree-1 pairs from
// reducing the 2-cell boundary columns against each other, which is the
// standard column reduction with the clearing step made implicit. Both
// produce the unique persistence pairing of the cell order.
//
// Conventions: a class that survives to the end of the filtration is
// reported as essential with death = 1.0 and no destroyer cell.
// Zero-persistence pairs (birth == death) are kept in the bar list but
// excluded from ranked queries; H^l_d is the l-th positive-persistence bar
// of dimension d.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "topo/complex.hpp"

namespace topo {

struct Bar {
  int dim = 0;
  double birth = 0.0;
  double death = 0.0;
  Cell creator;
  std::optional<Cell> destroyer;
  bool essential = false;

  double persistence() const { return death - birth; }

  bool operator==(const Bar& o) const {
    return dim == o.dim && birth == o.birth && death == o.death && creator == o.creator &&
           destroyer == o.destroyer && essential == o.essential;
  }
};

/// All bars, sorted within each dimension by persistence descending, ties by
/// smaller birth, then by creator cell index.
struct Barcode {
  std::vector<Bar> bars;

  bool operator==(const Barcode& o) const { return bars == o.bars; }
};

namespace persistence_detail {

inline int find_root(std::vector<std::int32_t>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

/// col <- col xor other, both sorted ascending.
inline void add_column(std::vector<std::int32_t>& col, const std::vector<std::int32_t>& other,
                       std::vector<std::int32_t>& tmp) {
  tmp.clear();
  std::size_t i = 0, j = 0;
  while (i < col.size() && j < other.size()) {
    if (col[i] < other[j]) {
      tmp.push_back(col[i++]);
    } else if (other[j] < col[i]) {
      tmp.push_back(other[j++]);
    } else {
      ++i;
      ++j;
    }
  }
  tmp.insert(tmp.end(), col.begin() + i, col.end());
  tmp.insert(tmp.end(), other.begin() + j, other.end());
  col.swap(tmp);
}

inline bool bar_order(const Bar& x, const Bar& y) {
  if (x.dim != y.dim) return x.dim < y.dim;
  const double px = x.persistence(), py = y.persistence();
  if (px != py) return px > py;
  if (x.birth != y.birth) return x.birth < y.birth;
  return x.creator < y.creator;
}

}  // namespace persistence_detail

/// Computes the persistence barcode of a filtered complex.
/// Throws std::invalid_argument if the cell order is not a valid filtration
/// (a face appearing after one of its cofaces, or filtration values that
/// decrease along the order).
inline Barcode compute_barcode(const FilteredComplex& fc) {
  const std::size_t n = fc.size();
  std::array<Cell, 4> faces;

  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos > 0 && fc.filtration(pos) < fc.filtration(pos - 1))
      throw std::invalid_argument("invalid filtration: values decrease along the order");
    const int nf = cell_faces(fc.cell(pos), faces);
    for (int f = 0; f < nf; ++f)
      if (static_cast<std::size_t>(fc.position_of(faces[f])) >= pos)
        throw std::invalid_argument("invalid filtration: face appears after its coface");
  }

  // -1 in partner marks an unpaired cell
  std::vector<std::int32_t> partner(n, -1);
  std::vector<std::int32_t> uf_parent(n, -1);   // over vertex positions
  std::vector<std::int32_t> comp_birth(n, -1);  // root -> creating vertex position
  std::vector<std::uint8_t> cycle_edge(n, 0);

  // low (edge position) -> reduced 2-cell column owning it
  std::vector<std::int32_t> owner(n, -1);
  std::vector<std::vector<std::int32_t>> columns(n);
  std::vector<std::int32_t> col, tmp;

  for (std::size_t pos = 0; pos < n; ++pos) {
    const Cell& cell = fc.cell(pos);
    switch (cell.dimension()) {
      case 0: {
        uf_parent[pos] = static_cast<std::int32_t>(pos);
        comp_birth[pos] = static_cast<std::int32_t>(pos);
        break;
      }
      case 1: {
        cell_faces(cell, faces);
        const int r1 = persistence_detail::find_root(uf_parent, fc.position_of(faces[0]));
        const int r2 = persistence_detail::find_root(uf_parent, fc.position_of(faces[1]));
        if (r1 == r2) {
          cycle_edge[pos] = 1;  // creates a loop; may be killed by a 2-cell
          break;
        }
        const std::int32_t b1 = comp_birth[r1], b2 = comp_birth[r2];
        const std::int32_t young = std::max(b1, b2);
        partner[young] = static_cast<std::int32_t>(pos);
        partner[pos] = young;
        uf_parent[r1] = r2;
        comp_birth[r2] = std::min(b1, b2);
        break;
      }
      case 2: {
        const int nf = cell_faces(cell, faces);
        col.clear();
        for (int f = 0; f < nf; ++f) col.push_back(fc.position_of(faces[f]));
        std::sort(col.begin(), col.end());
        while (!col.empty() && owner[col.back()] >= 0)
          persistence_detail::add_column(col, columns[owner[col.back()]], tmp);
        if (!col.empty()) {
          const std::int32_t low = col.back();
          owner[low] = static_cast<std::int32_t>(pos);
          partner[low] = static_cast<std::int32_t>(pos);
          partner[pos] = low;
          columns[pos] = col;
        }
        break;
      }
    }
  }

  Barcode barcode;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Cell& cell = fc.cell(pos);
    const int d = cell.dimension();
    const bool creates = d == 0 || (d == 1 && cycle_edge[pos]);
    if (!creates) continue;
    Bar bar;
    bar.dim = d;
    bar.birth = fc.filtration(pos);
    bar.creator = cell;
    if (partner[pos] >= 0) {
      bar.death = fc.filtration(partner[pos]);
      bar.destroyer = fc.cell(partner[pos]);
    } else {
      bar.death = 1.0;
      bar.essential = true;
    }
    barcode.bars.push_back(bar);
  }
  std::sort(barcode.bars.begin(), barcode.bars.end(), persistence_detail::bar_order);
  return barcode;
}

/// Number of dimension-d bars alive at p: birth <= p < death for finite
/// bars, birth <= p <= 1 for essential ones. Equals the d-th Betti number
/// of the binarized grid at threshold p.
inline int betti_at(const Barcode& barcode, double p, int d) {
  int count = 0;
  for (const Bar& bar : barcode.bars) {
    if (bar.dim != d || bar.birth > p) continue;
    if (bar.essential || p < bar.death) ++count;
  }
  return count;
}

/// The rank-th most persistent dimension-d bar (1-based), skipping
/// zero-persistence pairs; nullopt when fewer such bars exist.
inline std::optional<Bar> longest_bar(const Barcode& barcode, int d, int rank = 1) {
  if (rank < 1) throw std::invalid_argument("bar rank is 1-based");
  int seen = 0;
  for (const Bar& bar : barcode.bars) {
    if (bar.dim != d || bar.persistence() <= 0.0) continue;
    if (++seen == rank) return bar;
  }
  return std::nullopt;
}

}  // namespace topo
