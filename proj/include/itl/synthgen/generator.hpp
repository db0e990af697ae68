#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "itl/diffcore/rng.hpp"
#include "itl/floorplan/graph.hpp"

namespace itl {

/// Generator knobs. Defaults were calibrated so a few hundred plans average
/// about ten rooms.
struct GenParams {
  int min_rooms = 4;
  int max_rooms = 16;
  int grid_w = 48;              // cells
  int grid_h = 36;              // cells
  double cell_size = 0.5;       // metres per cell
  int min_side = 3;             // cells
  double cells_per_room = 44.0;
  double l_shape_prob = 0.35;
  double extra_door_prob = 0.08;
  double opening_prob = 0.35;   // door links between open-plan types become openings
  std::vector<double> type_distribution = default_type_distribution();

  static std::vector<double> default_type_distribution() {
    // closet, bedroom, bathroom, kitchen, living room, dining room, hallway,
    // garage, laundry, office, stairs, entry, balcony, patio, basement,
    // breakfast nook, other
    return {0.20, 0.17, 0.15, 0.05, 0.07, 0.015, 0.08, 0.03, 0.04,
            0.04, 0.03, 0.04, 0.02, 0.02, 0.01, 0.01, 0.025};
  }

  void validate() const {
    if (min_rooms < 2 || min_rooms > max_rooms || max_rooms > 30) {
      throw invalid_input("room range [" + std::to_string(min_rooms) + ", " + std::to_string(max_rooms) +
                          "] must satisfy 2 <= min <= max <= 30");
    }
    if (grid_w < min_side || grid_h < min_side || min_side < 1) throw invalid_input("grid too small for min_side");
    if (!(cell_size > 0.0)) throw invalid_input("cell_size must be positive");
    if (!(extra_door_prob >= 0.0 && extra_door_prob <= 1.0)) throw invalid_input("extra_door_prob outside [0, 1]");
    if (!(l_shape_prob >= 0.0 && l_shape_prob <= 1.0)) throw invalid_input("l_shape_prob outside [0, 1]");
    if (!(opening_prob >= 0.0 && opening_prob <= 1.0)) throw invalid_input("opening_prob outside [0, 1]");
    if (type_distribution.size() != RoomTypeVocabulary::standard().size()) {
      throw invalid_input("type_distribution must have one entry per room type");
    }
    double s = 0.0;
    for (double p : type_distribution) {
      if (p < 0.0) throw invalid_input("type_distribution has a negative entry");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw invalid_input("type_distribution must sum to 1");
  }
};

namespace synth {

struct CellRect {
  int x0, y0, x1, y1;  // half-open cell ranges
  int w() const { return x1 - x0; }
  int h() const { return y1 - y0; }
  int area() const { return w() * h(); }
};

/// Preferred floor area (m^2) per room type, in vocabulary order.
inline constexpr std::array<double, 17> kPreferredArea{3.0, 12.0, 5.0, 12.0, 24.0, 14.0, 6.0, 28.0, 5.0,
                                                       10.0, 6.0, 5.0, 6.0, 12.0, 24.0, 6.0, 8.0};

enum : std::size_t {
  kCloset = 0, kBedroom, kBathroom, kKitchen, kLiving, kDining, kHallway, kGarage, kLaundry,
  kOffice, kStairs, kEntry, kBalcony, kPatio, kBasement, kNook, kOther
};

/// Door affinity between two room types; hubs connect to everything.
inline double door_affinity(std::size_t a, std::size_t b) {
  auto is = [&](std::size_t x, std::size_t y) { return (a == x && b == y) || (a == y && b == x); };
  auto hub = [](std::size_t t) { return t == kHallway || t == kLiving || t == kEntry; };
  double w = 1.0;
  if (hub(a) || hub(b)) w *= 4.0;
  if (hub(a) && hub(b)) w *= 1.5;
  if (is(kCloset, kBedroom) || is(kBathroom, kBedroom) || is(kKitchen, kDining) || is(kKitchen, kNook) ||
      is(kLiving, kDining) || is(kKitchen, kLiving) || is(kGarage, kLaundry) || is(kGarage, kEntry) ||
      is(kBalcony, kLiving) || is(kPatio, kLiving) || is(kStairs, kHallway) || is(kBasement, kStairs))
    w *= 5.0;
  if (a == kCloset || b == kCloset) {
    if (!is(kCloset, kBedroom) && !hub(a == kCloset ? b : a)) w *= 0.1;
  }
  if (is(kBathroom, kKitchen) || is(kGarage, kBedroom) || is(kBathroom, kBathroom) || is(kCloset, kCloset)) w *= 0.1;
  return w;
}

inline bool open_plan_pair(std::size_t a, std::size_t b) {
  auto open = [](std::size_t t) { return t == kLiving || t == kDining || t == kKitchen || t == kNook || t == kEntry; };
  return open(a) && open(b);
}

/// Counter-clockwise outline of a simply connected cell set, collinear
/// vertices merged. `label(x, y)` says whether a cell belongs to the set.
template <typename Label>
Polygon trace_cells(int w, int h, double cell, Label&& label) {
  std::map<std::pair<int, int>, std::pair<int, int>> next;
  auto in = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && label(x, y); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!in(x, y)) continue;
      if (!in(x, y - 1)) next[{x, y}] = {x + 1, y};
      if (!in(x + 1, y)) next[{x + 1, y}] = {x + 1, y + 1};
      if (!in(x, y + 1)) next[{x + 1, y + 1}] = {x, y + 1};
      if (!in(x - 1, y)) next[{x, y + 1}] = {x, y};
    }
  std::vector<std::pair<int, int>> loop;
  auto start = next.begin()->first;
  auto cur = start;
  do {
    loop.push_back(cur);
    cur = next.at(cur);
  } while (cur != start && loop.size() <= next.size());
  Polygon poly;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = loop[(i + n - 1) % n];
    const auto& c = loop[i];
    const auto& q = loop[(i + 1) % n];
    const bool collinear = (p.first == c.first && c.first == q.first) || (p.second == c.second && c.second == q.second);
    if (!collinear) poly.push_back({c.first * cell, c.second * cell});
  }
  return poly;
}

/// Draws a spanning tree of the graph with P(tree) proportional to the product
/// of edge weights (Wilson's algorithm with weighted random walks).
inline std::vector<Pair> weighted_spanning_tree(std::size_t n, const std::vector<std::vector<double>>& w, Rng& rng) {
  std::vector<bool> in_tree(n, false);
  std::vector<int> next(n, -1);
  const std::size_t root = rng.below(n);
  in_tree[root] = true;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t s : order) {
    std::size_t u = s;
    while (!in_tree[u]) {
      const std::size_t v = rng.categorical(w[u]);
      next[u] = static_cast<int>(v);
      u = v;
    }
    u = s;
    while (!in_tree[u]) {
      in_tree[u] = true;
      u = static_cast<std::size_t>(next[u]);
    }
  }
  std::vector<Pair> edges;
  for (std::size_t v = 0; v < n; ++v)
    if (v != root) edges.push_back(make_pair_ordered(static_cast<int>(v), next[v]));
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace synth

/// Procedural rectilinear floorplan.
///
/// The house rectangle is sliced recursively on a cell grid; occasionally two
/// neighbouring slices merge into an L-shaped (or stepped) room. Types are
/// drawn from `type_distribution` reweighted by how well the room's size suits
/// each type, with exactly one kitchen and at least one bathroom from four
/// rooms up. Doors follow a random spanning tree of the wall-adjacency graph
/// weighted by type affinity, so every room is reachable, plus extra doors.
inline Floorplan generate_floorplan(const GenParams& params, std::uint64_t seed, const std::string& id = "") {
  using namespace synth;
  params.validate();
  Rng rng(seed);
  const RoomTypeVocabulary& vocab = RoomTypeVocabulary::standard();
  const int n_rooms = rng.between(params.min_rooms, params.max_rooms);
  const int merges = (n_rooms >= 3 && rng.bernoulli(params.l_shape_prob)) ? 1 : 0;
  const int leaves = n_rooms + merges;

  const double aspect = rng.uniform(1.0, 1.6);
  const double cells = params.cells_per_room * leaves * rng.uniform(0.85, 1.15);
  int W = std::clamp(static_cast<int>(std::lround(std::sqrt(cells * aspect))), params.min_side, params.grid_w);
  int H = std::clamp(static_cast<int>(std::lround(cells / W)), params.min_side, params.grid_h);

  std::vector<CellRect> rects{{0, 0, W, H}};
  const int ms = params.min_side;
  while (static_cast<int>(rects.size()) < leaves) {
    std::vector<double> weight(rects.size(), 0.0);
    for (std::size_t k = 0; k < rects.size(); ++k)
      if (rects[k].w() >= 2 * ms || rects[k].h() >= 2 * ms) weight[k] = std::pow(static_cast<double>(rects[k].area()), 2.0);
    if (std::all_of(weight.begin(), weight.end(), [](double x) { return x == 0.0; })) {
      throw invalid_input("cannot slice " + std::to_string(n_rooms) + " rooms into a " + std::to_string(W) + "x" +
                          std::to_string(H) + " cell grid; enlarge the grid");
    }
    const std::size_t pick = rng.categorical(weight);
    const CellRect r = rects[pick];
    bool vertical_cut = r.w() >= r.h();  // cut across the longer side
    if (vertical_cut && r.w() < 2 * ms) vertical_cut = false;
    if (!vertical_cut && r.h() < 2 * ms) vertical_cut = true;
    const int len = vertical_cut ? r.w() : r.h();
    const int lo = std::max(ms, static_cast<int>(std::floor(0.25 * len)));
    const int hi = std::min(len - ms, static_cast<int>(std::ceil(0.75 * len)));
    const int cut = rng.between(lo, std::max(lo, hi));
    CellRect a = r, b = r;
    if (vertical_cut) {
      a.x1 = r.x0 + cut;
      b.x0 = r.x0 + cut;
    } else {
      a.y1 = r.y0 + cut;
      b.y0 = r.y0 + cut;
    }
    rects[pick] = a;
    rects.push_back(b);
  }

  std::vector<int> label(static_cast<std::size_t>(W * H), -1);
  for (std::size_t k = 0; k < rects.size(); ++k)
    for (int y = rects[k].y0; y < rects[k].y1; ++y)
      for (int x = rects[k].x0; x < rects[k].x1; ++x) label[static_cast<std::size_t>(y * W + x)] = static_cast<int>(k);

  if (merges > 0) {
    // Candidate pairs share a boundary but do not form a rectangle together.
    std::vector<std::pair<int, int>> cands;
    for (std::size_t a = 0; a < rects.size(); ++a)
      for (std::size_t b = a + 1; b < rects.size(); ++b) {
        const CellRect& p = rects[a];
        const CellRect& q = rects[b];
        int shared = 0;
        bool rect_union = false;
        if (p.x1 == q.x0 || q.x1 == p.x0) {
          shared = std::min(p.y1, q.y1) - std::max(p.y0, q.y0);
          rect_union = p.y0 == q.y0 && p.y1 == q.y1;
        } else if (p.y1 == q.y0 || q.y1 == p.y0) {
          shared = std::min(p.x1, q.x1) - std::max(p.x0, q.x0);
          rect_union = p.x0 == q.x0 && p.x1 == q.x1;
        }
        if (shared >= ms && !rect_union && p.area() + q.area() <= 3 * params.cells_per_room) {
          cands.emplace_back(static_cast<int>(a), static_cast<int>(b));
        }
      }
    if (!cands.empty()) {
      const auto [a, b] = cands[rng.below(cands.size())];
      for (int& l : label)
        if (l == b) l = a;
    } else {
      // No suitable pair: keep the extra slice as its own room.
    }
  }

  // Compact labels to 0..n-1 in order of first appearance.
  std::map<int, int> remap;
  for (int l : label)
    if (!remap.count(l)) remap.emplace(l, static_cast<int>(remap.size()));
  for (int& l : label) l = remap.at(l);
  const std::size_t n = remap.size();

  Floorplan fp;
  fp.id = id;
  fp.rooms.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    fp.rooms[k].id = static_cast<int>(k);
    fp.rooms[k].polygon = trace_cells(W, H, params.cell_size,
                                      [&](int x, int y) { return label[static_cast<std::size_t>(y * W + x)] == static_cast<int>(k); });
  }

  // Room types from size and elongation.
  std::vector<std::vector<double>> type_w(n, std::vector<double>(vocab.size()));
  for (std::size_t k = 0; k < n; ++k) {
    const double area = signed_area(fp.rooms[k].polygon);
    const BoundingBox bb = bounding_box(fp.rooms[k].polygon);
    const double elong = std::max(bb.width(), bb.height()) / std::min(bb.width(), bb.height());
    for (std::size_t t = 0; t < vocab.size(); ++t) {
      const double z = std::log(area / kPreferredArea[t]) / 0.5;
      double w = params.type_distribution[t] * std::exp(-0.5 * z * z);
      if (t == kHallway) w *= elong >= 2.0 ? 4.0 : 0.3;
      type_w[k][t] = w + 1e-12;
    }
  }
  std::vector<std::size_t> types(n);
  for (std::size_t k = 0; k < n; ++k) types[k] = rng.categorical(type_w[k]);
  auto best_for = [&](std::size_t t, auto&& allowed) {
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k)
      if (allowed(k) && (best == n || type_w[k][t] > type_w[best][t])) best = k;
    return best;
  };
  {
    std::vector<std::size_t> kitchens;
    for (std::size_t k = 0; k < n; ++k)
      if (types[k] == kKitchen) kitchens.push_back(k);
    if (kitchens.empty()) {
      types[best_for(kKitchen, [](std::size_t) { return true; })] = kKitchen;
    } else {
      std::size_t keep = kitchens.front();
      for (std::size_t k : kitchens)
        if (type_w[k][kKitchen] > type_w[keep][kKitchen]) keep = k;
      for (std::size_t k : kitchens) {
        if (k == keep) continue;
        std::vector<double> w = type_w[k];
        w[kKitchen] = 0.0;
        types[k] = rng.categorical(w);
      }
    }
    if (n >= 4 && std::count(types.begin(), types.end(), kBathroom) == 0) {
      types[best_for(kBathroom, [&](std::size_t k) { return types[k] != kKitchen; })] = kBathroom;
    }
  }
  for (std::size_t k = 0; k < n; ++k) fp.rooms[k].type = vocab.name(types[k]);

  // Wall adjacency (shared boundary of at least one minimum side) for doors.
  std::vector<std::vector<double>> shared(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> door_w(n, std::vector<double>(n, 0.0));
  const double door_span = params.min_side * params.cell_size - 1e-9;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      shared[a][b] = shared[b][a] = shared_boundary_length(fp.rooms[a].polygon, fp.rooms[b].polygon);
      if (shared[a][b] >= door_span) door_w[a][b] = door_w[b][a] = door_affinity(types[a], types[b]);
    }
  // Fall back to any contact when the door-width graph is disconnected.
  {
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v)
          if (door_w[u][v] > 0.0 && comp[v] < 0) {
            comp[v] = ncomp;
            stack.push_back(v);
          }
      }
      ++ncomp;
    }
    if (ncomp > 1) {
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          if (a != b && shared[a][b] > kDefaultContactEpsilon && door_w[a][b] == 0.0) door_w[a][b] = door_affinity(types[a], types[b]);
    }
  }
  std::vector<Pair> doors = weighted_spanning_tree(n, door_w, rng);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (door_w[a][b] <= 0.0) continue;
      const Pair p{static_cast<int>(a), static_cast<int>(b)};
      if (std::binary_search(doors.begin(), doors.end(), p)) continue;
      if (rng.bernoulli(std::min(1.0, params.extra_door_prob * door_w[a][b]))) doors.push_back(p);
    }
  std::sort(doors.begin(), doors.end());
  for (const Pair& p : doors) {
    const bool opening = open_plan_pair(types[p.i], types[p.j]) && rng.bernoulli(params.opening_prob);
    auto& li = opening ? fp.rooms[p.i].opening_links : fp.rooms[p.i].door_links;
    auto& lj = opening ? fp.rooms[p.j].opening_links : fp.rooms[p.j].door_links;
    li.push_back(p.j);
    lj.push_back(p.i);
  }

  // Windows on exterior walls; none in closets, hallways or stairs.
  for (std::size_t k = 0; k < n; ++k) {
    double exterior = perimeter(fp.rooms[k].polygon);
    for (std::size_t o = 0; o < n; ++o)
      if (o != k) exterior -= shared[k][o];
    const std::size_t t = types[k];
    if (t == kCloset || t == kHallway || t == kStairs || exterior < 1.0) continue;
    const double expected = exterior / 3.5;
    int count = 0;
    for (int s = 0; s < static_cast<int>(std::ceil(expected * 1.5)); ++s)
      if (rng.bernoulli(expected / std::ceil(expected * 1.5))) ++count;
    fp.rooms[k].window_count = count;
  }
  return fp;
}

/// Stand-in for image-derived room embeddings: a fixed per-type mean plus
/// Gaussian noise, `dims` wide.
inline Tensor synthetic_image_features(const Floorplan& fp, Rng& rng, std::size_t dims = 16, double noise = 0.5) {
  const RoomTypeVocabulary& vocab = RoomTypeVocabulary::standard();
  static const Tensor means = [&] {
    Rng fixed(0x5ce7e5eedULL);
    Tensor m(vocab.size(), 16);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = fixed.normal();
    return m;
  }();
  Tensor out(fp.rooms.size(), dims);
  for (std::size_t r = 0; r < fp.rooms.size(); ++r) {
    const std::size_t t = vocab.index(fp.rooms[r].type);
    for (std::size_t c = 0; c < dims; ++c) out(r, c) = means(t, c % 16) + noise * rng.normal();
  }
  return out;
}

}  // namespace itl
