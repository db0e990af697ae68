#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "itl/error.hpp"
#include "itl/floorplan/geometry.hpp"

namespace itl {

inline constexpr std::size_t kChainCodeLength = 100;
inline constexpr int kChainCodePad = -1;
inline constexpr double kDefaultGridResolution = 0.5;

/// Lattice point in raster coordinates: column = x / resolution,
/// row = -y / resolution (rows grow downwards, as in an image).
struct LatticePoint {
  long col = 0;
  long row = 0;
  bool operator==(const LatticePoint&) const = default;
  auto operator<=>(const LatticePoint& o) const {
    if (auto c = row <=> o.row; c != 0) return c;
    return col <=> o.col;
  }
};

/// Freeman 4-direction code of a polygon boundary walked on the lattice.
///
/// Directions: 0 = +column, 1 = +row, 2 = -column, 3 = -row. The walk follows
/// the polygon's counter-clockwise vertex order, one step per lattice edge,
/// starting at `start` or, by default, at the first boundary point in raster
/// order (smallest row, then smallest column).
inline std::vector<int> chain_code(const Polygon& poly, double resolution = kDefaultGridResolution,
                                   std::optional<LatticePoint> start = std::nullopt) {
  if (!(resolution > 0.0)) throw invalid_input("chain_code: grid resolution must be positive");
  if (poly.size() < 3) throw invalid_input("chain_code: polygon needs at least 3 vertices");
  std::vector<LatticePoint> verts;
  for (const Point& p : poly) {
    LatticePoint q{std::lround(p.x / resolution), std::lround(-p.y / resolution)};
    if (verts.empty() || !(verts.back() == q)) verts.push_back(q);
  }
  while (verts.size() > 1 && verts.front() == verts.back()) verts.pop_back();

  const std::string advice = "polygon degenerates at grid resolution " + std::to_string(resolution) +
                             " m; use a finer resolution";
  std::vector<LatticePoint> walk;
  std::vector<int> code;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    LatticePoint a = verts[i];
    const LatticePoint b = verts[(i + 1) % verts.size()];
    const long dc = b.col - a.col, dr = b.row - a.row;
    if (dc != 0 && dr != 0) throw invalid_input("chain_code: polygon edge is not axis-aligned");
    const int dir = dc > 0 ? 0 : dr > 0 ? 1 : dc < 0 ? 2 : 3;
    const long steps = std::abs(dc) + std::abs(dr);
    for (long s = 0; s < steps; ++s) {
      walk.push_back(a);
      code.push_back(dir);
      a = LatticePoint{a.col + (dir == 0) - (dir == 2), a.row + (dir == 1) - (dir == 3)};
    }
  }
  if (code.size() < 4) throw invalid_input("chain_code: " + advice);
  {
    std::set<LatticePoint> seen(walk.begin(), walk.end());
    if (seen.size() != walk.size()) throw invalid_input("chain_code: boundary touches itself (region disconnected); " + advice);
  }
  std::size_t first = 0;
  if (start) {
    auto it = std::find(walk.begin(), walk.end(), *start);
    if (it == walk.end()) throw invalid_input("chain_code: start point is not on the boundary");
    first = static_cast<std::size_t>(it - walk.begin());
  } else {
    first = static_cast<std::size_t>(std::min_element(walk.begin(), walk.end()) - walk.begin());
  }
  std::rotate(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(first), code.end());
  return code;
}

/// Cyclic first difference mod 4: r_i = (c_{i+1} - c_i) mod 4, with the last
/// element differenced against the first.
inline std::vector<int> difference_code(const std::vector<int>& raw) {
  std::vector<int> r(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) r[i] = (((raw[(i + 1) % raw.size()] - raw[i]) % 4) + 4) % 4;
  return r;
}

/// Rotation of the sequence that is smallest read as a base-4 integer.
inline std::vector<int> min_circular_shift(const std::vector<int>& seq) {
  const std::size_t n = seq.size();
  std::size_t best = 0;
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      const int a = seq[(s + k) % n], b = seq[(best + k) % n];
      if (a != b) {
        if (a < b) best = s;
        break;
      }
    }
  }
  std::vector<int> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = seq[(best + k) % n];
  return out;
}

struct NormalizedChainCode {
  std::array<int, kChainCodeLength> code{};
  std::size_t length = 0;  // entries before padding
  bool truncated = false;
};

/// Difference code, minimum circular shift, then pad to 100 with -1. Longer
/// codes keep their first 100 entries and are flagged (and reported on stderr).
inline NormalizedChainCode normalize_chain_code(const std::vector<int>& raw, bool warn = true) {
  if (raw.empty()) throw invalid_input("normalize_chain_code: empty chain code");
  const std::vector<int> s = min_circular_shift(difference_code(raw));
  NormalizedChainCode out;
  out.code.fill(kChainCodePad);
  out.length = std::min(s.size(), kChainCodeLength);
  out.truncated = s.size() > kChainCodeLength;
  std::copy_n(s.begin(), out.length, out.code.begin());
  if (out.truncated && warn) {
    std::cerr << "warning: chain code of length " << s.size() << " truncated to " << kChainCodeLength << "\n";
  }
  return out;
}

}  // namespace itl
