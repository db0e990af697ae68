#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "itl/error.hpp"
#include "itl/floorplan/geometry.hpp"

namespace itl {

/// Ordered list of room-type names. The index of a name is its one-hot slot.
class RoomTypeVocabulary {
 public:
  explicit RoomTypeVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw invalid_input("room type vocabulary is empty");
  }

  static const RoomTypeVocabulary& standard() {
    static const RoomTypeVocabulary vocab({"closet", "bedroom", "bathroom", "kitchen", "living room", "dining room",
                                           "hallway", "garage", "laundry", "office", "stairs", "entry", "balcony",
                                           "patio", "basement", "breakfast nook", "other"});
    return vocab;
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t index(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw invalid_input("unknown room type '" + name + "'");
  }

 private:
  std::vector<std::string> names_;
};

struct Room {
  int id = 0;
  std::string type;
  Polygon polygon;  // metres, counter-clockwise, rectilinear
  std::vector<int> door_links;
  std::vector<int> opening_links;
  int window_count = 0;

  bool operator==(const Room&) const = default;
};

struct Floorplan {
  std::string id;
  std::vector<Room> rooms;

  std::size_t size() const noexcept { return rooms.size(); }
  bool operator==(const Floorplan&) const = default;
};

inline constexpr std::size_t kMinRooms = 2;
inline constexpr std::size_t kMaxRooms = 30;

/// Throws invalid_input describing the first violated floorplan invariant.
inline void validate(const Floorplan& fp) {
  const std::size_t n = fp.rooms.size();
  const std::string where = "floorplan '" + fp.id + "': ";
  if (n < kMinRooms || n > kMaxRooms) {
    throw invalid_input(where + "room count " + std::to_string(n) + " outside [2, 30]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Room& r = fp.rooms[i];
    const std::string rw = where + "room " + std::to_string(r.id) + ": ";
    if (r.id != static_cast<int>(i)) throw invalid_input(where + "room ids must be 0..N-1 in order, found " + std::to_string(r.id) + " at position " + std::to_string(i));
    if (r.polygon.size() < 4) throw invalid_input(rw + "polygon needs at least 4 vertices");
    if (!is_rectilinear(r.polygon)) throw invalid_input(rw + "polygon is not axis-aligned rectilinear");
    if (!is_simple(r.polygon)) throw invalid_input(rw + "polygon self-intersects");
    if (signed_area(r.polygon) <= 0.0) throw invalid_input(rw + "polygon must be counter-clockwise with positive area");
    if (r.window_count < 0) throw invalid_input(rw + "negative window_count");
    for (const auto* links : {&r.door_links, &r.opening_links})
      for (int j : *links) {
        if (j < 0 || j >= static_cast<int>(n)) throw invalid_input(rw + "dangling link to room " + std::to_string(j));
        if (j == r.id) throw invalid_input(rw + "links to itself");
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (overlap_area(fp.rooms[i].polygon, fp.rooms[j].polygon) > 1e-9) {
        throw invalid_input(where + "rooms " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
}

/// Applies a rigid transform (k * 90 degree rotation, then translation) to every room.
inline Floorplan transformed(const Floorplan& fp, int quarter_turns, double dx, double dy) {
  Floorplan out = fp;
  for (Room& r : out.rooms) r.polygon = translate(rotate90(r.polygon, quarter_turns), dx, dy);
  return out;
}

}  // namespace itl
