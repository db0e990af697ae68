#pragma once

// JSON codecs for floorplans, graphs, feature matrices and task instances,
// plus Graphviz DOT export.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "itl/floorplan/task.hpp"

namespace itl {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw invalid_input("schema violation at " + path + ": " + what);
}

inline const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing field '") + key + "'");
  return *it;
}

inline int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer");
  return v.get<int>();
}

inline double as_double(const Json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

inline std::vector<int> as_int_list(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_int(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline Json pairs_json(const std::vector<Pair>& pairs) {
  Json a = Json::array();
  for (const Pair& p : pairs) a.push_back({p.i, p.j});
  return a;
}

inline std::vector<Pair> pairs_from_json(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of [i, j] pairs");
  std::vector<Pair> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    if (!v[k].is_array() || v[k].size() != 2) schema_error(p, "expected [i, j]");
    const int i = as_int(v[k][0], p + "[0]"), j = as_int(v[k][1], p + "[1]");
    if (!(i < j)) schema_error(p, "pairs must satisfy i < j");
    out.push_back({i, j});
  }
  return out;
}

}  // namespace detail

inline Json to_json(const Floorplan& fp) {
  Json rooms = Json::array();
  for (const Room& r : fp.rooms) {
    Json poly = Json::array();
    for (const Point& p : r.polygon) poly.push_back({p.x, p.y});
    rooms.push_back(Json{{"id", r.id},
                         {"type", r.type},
                         {"polygon", poly},
                         {"door_links", r.door_links},
                         {"opening_links", r.opening_links},
                         {"window_count", r.window_count}});
  }
  return Json{{"id", fp.id}, {"rooms", rooms}};
}

/// Parses and validates a floorplan document. Errors name the offending field.
inline Floorplan floorplan_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  Floorplan fp;
  const Json& id = field(j, "id", path);
  if (!id.is_string()) schema_error(path + ".id", "expected a string");
  fp.id = id.get<std::string>();
  const Json& rooms = field(j, "rooms", path);
  if (!rooms.is_array()) schema_error(path + ".rooms", "expected an array");
  for (std::size_t k = 0; k < rooms.size(); ++k) {
    const std::string rp = path + ".rooms[" + std::to_string(k) + "]";
    const Json& rj = rooms[k];
    Room r;
    r.id = as_int(field(rj, "id", rp), rp + ".id");
    const Json& type = field(rj, "type", rp);
    if (!type.is_string()) schema_error(rp + ".type", "expected a string");
    r.type = type.get<std::string>();
    const Json& poly = field(rj, "polygon", rp);
    if (!poly.is_array()) schema_error(rp + ".polygon", "expected an array of [x, y]");
    for (std::size_t v = 0; v < poly.size(); ++v) {
      const std::string pp = rp + ".polygon[" + std::to_string(v) + "]";
      if (!poly[v].is_array() || poly[v].size() != 2) schema_error(pp, "expected [x, y]");
      r.polygon.push_back({as_double(poly[v][0], pp + "[0]"), as_double(poly[v][1], pp + "[1]")});
    }
    r.door_links = as_int_list(field(rj, "door_links", rp), rp + ".door_links");
    r.opening_links = as_int_list(field(rj, "opening_links", rp), rp + ".opening_links");
    r.window_count = as_int(field(rj, "window_count", rp), rp + ".window_count");
    fp.rooms.push_back(std::move(r));
  }
  validate(fp);
  return fp;
}

/// Graph document: {"n", "door", "wall", "spatial"} with [i, j] pairs, i < j.
/// When `probabilities` is given, per-pair probabilities are attached too.
inline Json graph_to_json(const MultiAdjacency& g, double threshold = 0.5, const MultiAdjacency* probabilities = nullptr) {
  Json j{{"n", g.n},
         {"door", detail::pairs_json(g.edges(Relation::door, threshold))},
         {"wall", detail::pairs_json(g.edges(Relation::wall, threshold))},
         {"spatial", detail::pairs_json(g.edges(Relation::spatial, threshold))}};
  if (probabilities != nullptr) {
    Json probs = Json::array();
    for (std::size_t a = 0; a < probabilities->n; ++a)
      for (std::size_t b = a + 1; b < probabilities->n; ++b)
        probs.push_back(Json{{"pair", {a, b}},
                             {"door", probabilities->door(a, b)},
                             {"wall", probabilities->wall(a, b)},
                             {"spatial", probabilities->spatial(a, b)}});
    j["probabilities"] = probs;
  }
  return j;
}

inline MultiAdjacency graph_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  const int n = as_int(field(j, "n", path), path + ".n");
  if (n < 0) schema_error(path + ".n", "negative node count");
  MultiAdjacency g(static_cast<std::size_t>(n));
  for (Relation r : {Relation::door, Relation::wall, Relation::spatial}) {
    const std::string key = relation_name(r);
    for (const Pair& p : pairs_from_json(field(j, key.c_str(), path), path + "." + key)) {
      if (p.j >= n || p.i < 0) schema_error(path + "." + key, "node index out of range");
      g.set_symmetric(r, p.i, p.j, 1.0);
    }
  }
  return g;
}

inline Json to_json(const FeatureMatrix& fm) {
  Json layout = Json::array();
  for (const auto& e : fm.layout) layout.push_back(Json{{"set", e.name}, {"begin", e.begin}, {"end", e.end}});
  return Json{{"n", fm.n()}, {"f", fm.f()}, {"layout", layout}, {"data", fm.x.values()}};
}

inline FeatureMatrix feature_matrix_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  const int n = as_int(field(j, "n", path), path + ".n");
  const int f = as_int(field(j, "f", path), path + ".f");
  const Json& data = field(j, "data", path);
  if (!data.is_array() || data.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(f)) {
    schema_error(path + ".data", "expected n*f numbers");
  }
  FeatureMatrix fm;
  std::vector<double> values;
  values.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) values.push_back(as_double(data[k], path + ".data[" + std::to_string(k) + "]"));
  fm.x = Tensor(static_cast<std::size_t>(n), static_cast<std::size_t>(f), std::move(values));
  const Json& layout = field(j, "layout", path);
  if (!layout.is_array()) schema_error(path + ".layout", "expected an array");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const std::string lp = path + ".layout[" + std::to_string(k) + "]";
    const Json& s = field(layout[k], "set", lp);
    if (!s.is_string()) schema_error(lp + ".set", "expected a string");
    fm.layout.push_back({s.get<std::string>(), static_cast<std::size_t>(as_int(field(layout[k], "begin", lp), lp)),
                         static_cast<std::size_t>(as_int(field(layout[k], "end", lp), lp))});
  }
  if (!layout_partitions_columns(fm)) schema_error(path + ".layout", "layout does not partition the feature columns");
  return fm;
}

inline Json tensor_to_json(const Tensor& t) { return Json{{"shape", {t.rows(), t.cols()}}, {"data", t.values()}}; }

inline Tensor tensor_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  const Json& shape = field(j, "shape", path);
  if (!shape.is_array() || shape.size() != 2) schema_error(path + ".shape", "expected [rows, cols]");
  const int r = as_int(shape[0], path + ".shape[0]"), c = as_int(shape[1], path + ".shape[1]");
  const Json& data = field(j, "data", path);
  if (!data.is_array() || data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
    schema_error(path + ".data", "expected rows*cols numbers");
  }
  std::vector<double> v;
  v.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) v.push_back(as_double(data[k], path + ".data"));
  return Tensor(static_cast<std::size_t>(r), static_cast<std::size_t>(c), std::move(v));
}

inline Json to_json(const TaskInstance& t) {
  return Json{{"floorplan_id", t.floorplan_id},
              {"task", task_name(t.kind)},
              {"observe_fraction", t.observe_fraction},
              {"features", to_json(t.features)},
              {"a0", Json{{"door", tensor_to_json(t.a0.door)},
                          {"wall", tensor_to_json(t.a0.wall)},
                          {"spatial", tensor_to_json(t.a0.spatial)}}},
              {"target", graph_to_json(t.target)},
              {"heldout", detail::pairs_json(t.heldout)}};
}

inline TaskInstance task_instance_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  TaskInstance t;
  t.floorplan_id = field(j, "floorplan_id", path).get<std::string>();
  t.kind = parse_task(field(j, "task", path).get<std::string>());
  t.observe_fraction = as_double(field(j, "observe_fraction", path), path + ".observe_fraction");
  t.features = feature_matrix_from_json(field(j, "features", path), path + ".features");
  const Json& a0 = field(j, "a0", path);
  t.a0.door = tensor_from_json(field(a0, "door", path + ".a0"), path + ".a0.door");
  t.a0.wall = tensor_from_json(field(a0, "wall", path + ".a0"), path + ".a0.wall");
  t.a0.spatial = tensor_from_json(field(a0, "spatial", path + ".a0"), path + ".a0.spatial");
  t.a0.n = t.a0.door.rows();
  t.target = graph_from_json(field(j, "target", path), path + ".target");
  t.heldout = pairs_from_json(field(j, "heldout", path), path + ".heldout");
  return t;
}

/// One undirected graph; door / wall edges carry rel=..., nodes carry their type.
inline std::string to_dot(const MultiAdjacency& g, const std::vector<std::string>& node_types, double threshold = 0.5,
                          const std::string& name = "floorplan") {
  std::ostringstream os;
  os << "graph \"" << name << "\" {\n";
  for (std::size_t i = 0; i < g.n; ++i) {
    os << "  " << i << " [label=\"" << (i < node_types.size() ? node_types[i] : std::string("room")) << "\", type=\""
       << (i < node_types.size() ? node_types[i] : std::string("room")) << "\"];\n";
  }
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (g.door(i, j) >= threshold) os << "  " << i << " -- " << j << " [rel=door];\n";
      if (g.wall(i, j) >= threshold) os << "  " << i << " -- " << j << " [rel=wall];\n";
    }
  os << "}\n";
  return os.str();
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw invalid_input("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const Json& j, int indent = 1) {
  write_text_file(path, j.dump(indent) + "\n");
}

}  // namespace itl
