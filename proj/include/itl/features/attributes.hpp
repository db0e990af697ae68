#pragma once

#include <optional>
#include <vector>

#include "itl/features/chain_code.hpp"
#include "itl/features/feature_matrix.hpp"
#include "itl/floorplan/floorplan.hpp"

namespace itl {

inline constexpr std::size_t kBasicCounts = 3;  // doors, windows, openings
inline constexpr std::size_t kDistanceWidth = 5;

/// One-hot room type followed by raw door / window / opening counts.
inline std::vector<double> basic_features(const Room& room,
                                          const RoomTypeVocabulary& vocab = RoomTypeVocabulary::standard()) {
  std::vector<double> v(vocab.size() + kBasicCounts, 0.0);
  v[vocab.index(room.type)] = 1.0;
  v[vocab.size() + 0] = static_cast<double>(room.door_links.size());
  v[vocab.size() + 1] = static_cast<double>(room.window_count);
  v[vocab.size() + 2] = static_cast<double>(room.opening_links.size());
  return v;
}

/// (perimeter, area, longer bounding-box side, shorter bounding-box side,
/// area / bounding-box area). Sides are sorted so the vector does not change
/// under 90 degree rotation.
inline std::vector<double> distance_features(const Room& room) {
  const double area = signed_area(room.polygon);
  if (!(area > 0.0)) throw invalid_input("room " + std::to_string(room.id) + ": degenerate polygon (area <= 0)");
  const BoundingBox bb = bounding_box(room.polygon);
  const double w = bb.width(), h = bb.height();
  return {perimeter(room.polygon), area, std::max(w, h), std::min(w, h), area / (w * h)};
}

struct FeatureConfig {
  AttributeSelection sets;
  double grid_resolution = kDefaultGridResolution;
};

/// Result of assembling a floorplan's features; counts chain codes that had to
/// be truncated to the fixed length.
struct AssembledFeatures {
  FeatureMatrix matrix;
  std::size_t truncated_codes = 0;
};

/// Concatenates the enabled attribute sets (basic | distance | shape | image)
/// column-wise. `image` supplies the externally computed set-4 rows. When
/// `stats` is given, the distance columns are z-scored with it.
inline AssembledFeatures assemble_features(const Floorplan& fp, const FeatureConfig& cfg,
                                           const std::optional<Tensor>& image = std::nullopt,
                                           const StandardizationStats* stats = nullptr,
                                           const RoomTypeVocabulary& vocab = RoomTypeVocabulary::standard()) {
  const std::size_t n = fp.rooms.size();
  if (cfg.sets.has(AttributeSet::image)) {
    if (!image) throw invalid_input("attribute set 4 enabled but no image feature matrix supplied");
    if (image->rows() != n) {
      throw invalid_input("image feature rows " + std::to_string(image->rows()) + " != room count " + std::to_string(n));
    }
  }
  AssembledFeatures out;
  std::vector<std::vector<double>> rows(n);
  std::size_t width = 0;
  auto add_set = [&](AttributeSet set, std::size_t w) {
    out.matrix.layout.push_back({attribute_set_name(set), width, width + w});
    width += w;
  };
  if (cfg.sets.has(AttributeSet::basic)) {
    for (std::size_t i = 0; i < n; ++i) {
      auto b = basic_features(fp.rooms[i], vocab);
      rows[i].insert(rows[i].end(), b.begin(), b.end());
    }
    add_set(AttributeSet::basic, vocab.size() + kBasicCounts);
  }
  if (cfg.sets.has(AttributeSet::distance)) {
    for (std::size_t i = 0; i < n; ++i) {
      auto d = distance_features(fp.rooms[i]);
      rows[i].insert(rows[i].end(), d.begin(), d.end());
    }
    add_set(AttributeSet::distance, kDistanceWidth);
  }
  if (cfg.sets.has(AttributeSet::shape)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto norm = normalize_chain_code(chain_code(fp.rooms[i].polygon, cfg.grid_resolution));
      out.truncated_codes += norm.truncated ? 1 : 0;
      for (int c : norm.code) rows[i].push_back(static_cast<double>(c));
    }
    add_set(AttributeSet::shape, kChainCodeLength);
  }
  if (cfg.sets.has(AttributeSet::image)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < image->cols(); ++c) rows[i].push_back((*image)(i, c));
    add_set(AttributeSet::image, image->cols());
  }
  out.matrix.x = Tensor(n, width);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < width; ++c) out.matrix.x(i, c) = rows[i][c];
  if (stats != nullptr) apply_standardization(out.matrix, *stats);
  return out;
}

}  // namespace itl
