// grid.hpp
//
// Probability grids, binary masks and their on-disk formats.
// Grids are H x W row-major arrays of per-pixel foreground probabilities
// in [0, 1]. Two file formats are supported: plain-text CSV (one grid row
// per line, decimal floats) and PGM P2 with maxval 255, where the stored
// integer is round(255 * S).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace topo {

/// H x W array of per-pixel foreground probabilities S[i,j] in [0, 1].
struct ProbabilityGrid {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ProbabilityGrid() = default;
  ProbabilityGrid(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
  std::size_t size() const { return values.size(); }
  bool same_shape(const ProbabilityGrid& o) const { return height == o.height && width == o.width; }
  bool operator==(const ProbabilityGrid& o) const {
    return height == o.height && width == o.width && values == o.values;
  }
};

/// H x W boolean mask; true marks foreground pixels.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  BinaryMask() = default;
  BinaryMask(int h, int w, bool fill = false)
      : height(h), width(w),
        values(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill ? 1 : 0) {}

  std::uint8_t& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  bool at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j] != 0; }
  std::size_t size() const { return values.size(); }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : values) n += v ? 1 : 0;
    return n;
  }
  bool operator==(const BinaryMask& o) const {
    return height == o.height && width == o.width && values == o.values;
  }
};

/// H x W array of real values; used for pixelwise gradients of losses.
struct GradientMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  GradientMap() = default;
  GradientMap(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
  std::size_t size() const { return values.size(); }
  bool operator==(const GradientMap& o) const {
    return height == o.height && width == o.width && values == o.values;
  }
};

/// Throws std::invalid_argument unless the grid satisfies its invariants:
/// positive shape, matching buffer length, all values in [0, 1].
inline void validate_grid(const ProbabilityGrid& grid) {
  if (grid.height <= 0 || grid.width <= 0)
    throw std::invalid_argument("grid is empty: height and width must be positive");
  if (grid.values.size() != static_cast<std::size_t>(grid.height) * grid.width)
    throw std::invalid_argument("grid buffer length does not match height * width");
  for (double v : grid.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("grid value outside [0, 1]");
}

/// Binarization B(p): mask[i,j] = true iff S[i,j] >= 1 - p (inclusive).
/// Evaluated as 1 - S <= p, the same rounding the filtration values use, so
/// the mask equals exactly the set of pixel cells with filtration <= p.
/// Monotone in p: p <= p' implies mask(p) is a subset of mask(p').
inline BinaryMask binarize(const ProbabilityGrid& grid, double p) {
  BinaryMask mask(grid.height, grid.width);
  for (std::size_t n = 0; n < grid.values.size(); ++n)
    mask.values[n] = (1.0 - grid.values[n]) <= p ? 1 : 0;
  return mask;
}

/// Mask as a 0/1-valued grid (handy for Dice against raw predictions).
inline ProbabilityGrid grid_from_mask(const BinaryMask& mask) {
  ProbabilityGrid g(mask.height, mask.width);
  for (std::size_t n = 0; n < mask.values.size(); ++n) g.values[n] = mask.values[n] ? 1.0 : 0.0;
  return g;
}

inline BinaryMask mask_from_grid(const ProbabilityGrid& grid) {
  return binarize(grid, 0.5);
}

// ---------------------------------------------------------------------------
// CSV format: one grid row per line, comma-separated decimal floats.
// ---------------------------------------------------------------------------

inline ProbabilityGrid read_grid_csv(std::istream& in, const std::string& origin = "<stream>") {
  ProbabilityGrid grid;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    // tolerate trailing \r and blank trailing lines
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed grid: bad number '" + tok + "' at row " +
                                 std::to_string(row) + " in " + origin);
      }
      while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
      if (pos != tok.size())
        throw std::runtime_error("malformed grid: trailing characters in '" + tok + "' in " + origin);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::runtime_error("grid value " + std::to_string(v) + " outside [0, 1] in " + origin);
      vals.push_back(v);
    }
    if (grid.width == 0) {
      grid.width = static_cast<int>(vals.size());
    } else if (static_cast<int>(vals.size()) != grid.width) {
      throw std::runtime_error("malformed grid: ragged row " + std::to_string(row) + " in " + origin);
    }
    grid.values.insert(grid.values.end(), vals.begin(), vals.end());
    ++row;
  }
  grid.height = row;
  if (grid.height == 0 || grid.width == 0)
    throw std::runtime_error("malformed grid: no data in " + origin);
  return grid;
}

inline ProbabilityGrid load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  return read_grid_csv(in, path);
}

inline void write_grid_csv(std::ostream& out, const ProbabilityGrid& grid) {
  char buf[40];
  for (int i = 0; i < grid.height; ++i) {
    for (int j = 0; j < grid.width; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid.at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline void save_grid_csv(const std::string& path, const ProbabilityGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  write_grid_csv(out, grid);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// PGM P2 format, maxval 255; stored value = round(255 * S).
// ---------------------------------------------------------------------------

inline ProbabilityGrid read_grid_pgm(std::istream& in, const std::string& origin = "<stream>") {
  auto next_token = [&in, &origin]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("malformed PGM: unexpected end of " + origin);
  };
  const std::string magic = next_token();
  if (magic != "P2") throw std::runtime_error("malformed PGM: expected P2 header in " + origin);
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0) throw std::runtime_error("malformed PGM: bad dimensions in " + origin);
  if (maxval != 255) throw std::runtime_error("unsupported PGM maxval (must be 255) in " + origin);
  ProbabilityGrid grid(h, w);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const int v = std::stoi(next_token());
    if (v < 0 || v > maxval)
      throw std::runtime_error("PGM value " + std::to_string(v) + " outside [0, 255] in " + origin);
    grid.values[n] = static_cast<double>(v) / 255.0;
  }
  return grid;
}

inline ProbabilityGrid load_grid_pgm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  return read_grid_pgm(in, path);
}

inline void write_grid_pgm(std::ostream& out, const ProbabilityGrid& grid) {
  out << "P2\n" << grid.width << ' ' << grid.height << "\n255\n";
  for (int i = 0; i < grid.height; ++i) {
    for (int j = 0; j < grid.width; ++j)
      out << (j ? " " : "") << static_cast<int>(std::lround(255.0 * grid.at(i, j)));
    out << '\n';
  }
}

inline void save_grid_pgm(const std::string& path, const ProbabilityGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  write_grid_pgm(out, grid);
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Loads a grid choosing the format from the file extension (.pgm or CSV).
inline ProbabilityGrid load_grid(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".pgm" || ext == ".PGM") return load_grid_pgm(path);
  return load_grid_csv(path);
}

}  // namespace topo
