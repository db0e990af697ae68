#pragma once

#include <algorithm>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "itl/features/attributes.hpp"
#include "itl/floorplan/io.hpp"
#include "itl/synthgen/generator.hpp"

namespace itl {

/// One floorplan with its ground truth and raw (unstandardized) features for
/// every attribute set.
struct CorpusRecord {
  Floorplan floorplan;
  MultiAdjacency graph;
  FeatureMatrix features;
  bool operator==(const CorpusRecord&) const = default;
};

struct CorpusStats {
  std::size_t count = 0;
  double mean_nodes = 0.0;
  double mean_spatial = 0.0;
  double mean_door = 0.0;
  double mean_wall = 0.0;
  std::size_t min_nodes = 0;
  std::size_t max_nodes = 0;
  std::size_t truncated_codes = 0;
  double spatial_door_ratio() const { return mean_door > 0.0 ? mean_spatial / mean_door : 0.0; }

  /// Nonzeros of the symmetric spatial matrix with its unit diagonal, 2E + N.
  /// Published dataset tables count spatial connections this way (their
  /// per-graph means exceed the planar bound on undirected edges) while door
  /// connections are counted once per pair.
  double mean_spatial_entries() const { return 2.0 * mean_spatial + mean_nodes; }
  double spatial_entries_door_ratio() const { return mean_door > 0.0 ? mean_spatial_entries() / mean_door : 0.0; }
};

struct Corpus {
  GenParams params;
  std::uint64_t seed = 0;
  std::vector<CorpusRecord> train, val, test;
  CorpusStats stats;

  std::size_t size() const { return train.size() + val.size() + test.size(); }
  const std::vector<CorpusRecord>& split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw invalid_input("unknown split '" + name + "' (expected train, val or test)");
  }
};

struct SplitSizes {
  std::size_t train, val, test;
};

/// 700 : 200 : 317 proportions, rounding train and validation down.
inline SplitSizes split_sizes(std::size_t n) {
  const std::size_t train = n * 700 / 1217;
  const std::size_t val = n * 200 / 1217;
  return {train, val, n - train - val};
}

inline CorpusStats corpus_stats(const std::vector<const CorpusRecord*>& records) {
  CorpusStats s;
  s.count = records.size();
  if (records.empty()) return s;
  s.min_nodes = records.front()->graph.n;
  for (const CorpusRecord* r : records) {
    s.mean_nodes += static_cast<double>(r->graph.n);
    s.mean_spatial += static_cast<double>(r->graph.edges(Relation::spatial).size());
    s.mean_door += static_cast<double>(r->graph.edges(Relation::door).size());
    s.mean_wall += static_cast<double>(r->graph.edges(Relation::wall).size());
    s.min_nodes = std::min(s.min_nodes, r->graph.n);
    s.max_nodes = std::max(s.max_nodes, r->graph.n);
  }
  const double c = static_cast<double>(s.count);
  s.mean_nodes /= c;
  s.mean_spatial /= c;
  s.mean_door /= c;
  s.mean_wall /= c;
  return s;
}

inline std::string plan_id(std::uint64_t seed, std::size_t index) {
  std::ostringstream os;
  os << "synth-" << seed << "-" << std::setw(5) << std::setfill('0') << index;
  return os.str();
}

/// Generates one record with derived per-plan seeds for geometry and for the
/// stand-in image embedding.
inline CorpusRecord generate_record(const GenParams& params, std::uint64_t corpus_seed, std::size_t index,
                                    std::size_t* truncated = nullptr) {
  const std::uint64_t s = mix_seed(corpus_seed, index);
  CorpusRecord rec;
  rec.floorplan = generate_floorplan(params, s, plan_id(corpus_seed, index));
  validate(rec.floorplan);
  rec.graph = build_graph(rec.floorplan);
  Rng image_rng(mix_seed(s, 4));
  const Tensor image = synthetic_image_features(rec.floorplan, image_rng);
  FeatureConfig cfg;
  cfg.sets = AttributeSelection::parse("1,2,3,4");
  AssembledFeatures af = assemble_features(rec.floorplan, cfg, image);
  if (truncated != nullptr) *truncated += af.truncated_codes;
  rec.features = std::move(af.matrix);
  return rec;
}

/// Records are seeded independently, so any `threads` count yields the same
/// corpus.
inline Corpus generate_corpus(std::size_t n_graphs, const GenParams& params, std::uint64_t seed, unsigned threads = 1) {
  if (n_graphs < 10) throw invalid_input("corpus needs at least 10 graphs, got " + std::to_string(n_graphs));
  params.validate();
  Corpus c;
  c.params = params;
  c.seed = seed;
  const SplitSizes sz = split_sizes(n_graphs);
  std::vector<CorpusRecord> records(n_graphs);
  std::vector<std::size_t> truncated_per(n_graphs, 0);
  std::vector<std::exception_ptr> failures(n_graphs);
  auto work = [&](std::size_t first, std::size_t step) {
    for (std::size_t i = first; i < n_graphs; i += step) {
      try {
        records[i] = generate_record(params, seed, i, &truncated_per[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_graphs)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  std::size_t truncated = 0;
  for (std::size_t i = 0; i < n_graphs; ++i) {
    truncated += truncated_per[i];
    auto& dst = i < sz.train ? c.train : i < sz.train + sz.val ? c.val : c.test;
    dst.push_back(std::move(records[i]));
  }
  std::vector<const CorpusRecord*> all;
  for (const auto* split : {&c.train, &c.val, &c.test})
    for (const auto& r : *split) all.push_back(&r);
  c.stats = corpus_stats(all);
  c.stats.truncated_codes = truncated;
  return c;
}

// ---------------------------------------------------------------- JSON codecs

inline Json to_json(const GenParams& p) {
  return Json{{"min_rooms", p.min_rooms},           {"max_rooms", p.max_rooms},
              {"grid_w", p.grid_w},                 {"grid_h", p.grid_h},
              {"cell_size", p.cell_size},           {"min_side", p.min_side},
              {"cells_per_room", p.cells_per_room}, {"l_shape_prob", p.l_shape_prob},
              {"extra_door_prob", p.extra_door_prob}, {"opening_prob", p.opening_prob},
              {"type_distribution", p.type_distribution}};
}

inline GenParams gen_params_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  GenParams p;
  p.min_rooms = as_int(field(j, "min_rooms", path), path + ".min_rooms");
  p.max_rooms = as_int(field(j, "max_rooms", path), path + ".max_rooms");
  p.grid_w = as_int(field(j, "grid_w", path), path + ".grid_w");
  p.grid_h = as_int(field(j, "grid_h", path), path + ".grid_h");
  p.cell_size = as_double(field(j, "cell_size", path), path + ".cell_size");
  p.min_side = as_int(field(j, "min_side", path), path + ".min_side");
  p.cells_per_room = as_double(field(j, "cells_per_room", path), path + ".cells_per_room");
  p.l_shape_prob = as_double(field(j, "l_shape_prob", path), path + ".l_shape_prob");
  p.extra_door_prob = as_double(field(j, "extra_door_prob", path), path + ".extra_door_prob");
  p.opening_prob = as_double(field(j, "opening_prob", path), path + ".opening_prob");
  p.type_distribution = field(j, "type_distribution", path).get<std::vector<double>>();
  p.validate();
  return p;
}

inline Json to_json(const CorpusStats& s) {
  return Json{{"count", s.count},
              {"mean_nodes", s.mean_nodes},
              {"mean_spatial_edges", s.mean_spatial},
              {"mean_door_edges", s.mean_door},
              {"mean_wall_edges", s.mean_wall},
              {"spatial_door_ratio", s.spatial_door_ratio()},
              {"mean_spatial_entries", s.mean_spatial_entries()},
              {"spatial_entries_door_ratio", s.spatial_entries_door_ratio()},
              {"min_nodes", s.min_nodes},
              {"max_nodes", s.max_nodes},
              {"truncated_chain_codes", s.truncated_codes}};
}

inline Json to_json(const CorpusRecord& r) {
  return Json{{"floorplan", to_json(r.floorplan)}, {"graph", graph_to_json(r.graph)}, {"features", to_json(r.features)}};
}

inline CorpusRecord corpus_record_from_json(const Json& j, const std::string& path) {
  using namespace detail;
  CorpusRecord r;
  r.floorplan = floorplan_from_json(field(j, "floorplan", path), path + ".floorplan");
  r.graph = graph_from_json(field(j, "graph", path), path + ".graph");
  r.features = feature_matrix_from_json(field(j, "features", path), path + ".features");
  if (r.graph.n != r.floorplan.rooms.size() || r.features.n() != r.graph.n) {
    throw invalid_input("schema violation at " + path + ": room, graph and feature sizes disagree");
  }
  return r;
}

inline std::string statistics_report(const Corpus& c) {
  const CorpusStats& s = c.stats;
  const SplitSizes sz{c.train.size(), c.val.size(), c.test.size()};
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "graphs            " << s.count << " (train " << sz.train << ", val " << sz.val << ", test " << sz.test << ")\n"
     << "nodes per graph   mean " << s.mean_nodes << ", range [" << s.min_nodes << ", " << s.max_nodes << "]\n"
     << "spatial edges     mean " << s.mean_spatial << "\n"
     << "door edges        mean " << s.mean_door << "\n"
     << "wall edges        mean " << s.mean_wall << "\n"
     << "spatial : door    " << s.spatial_door_ratio() << " (edges), " << s.spatial_entries_door_ratio()
     << " (spatial matrix entries 2E+N = " << s.mean_spatial_entries() << ")\n"
     << "truncated codes   " << s.truncated_codes << "\n";
  return os.str();
}

/// Writes train.json, val.json, test.json, manifest.json and statistics.txt.
inline void write_corpus(const Corpus& c, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create directory '" + dir + "': " + ec.message());
  for (const char* name : {"train", "val", "test"}) {
    Json records = Json::array();
    for (const CorpusRecord& r : c.split(name)) records.push_back(to_json(r));
    write_json_file(dir + "/" + name + ".json", Json{{"split", name}, {"records", std::move(records)}}, -1);
  }
  Json manifest{{"format_version", 1},
                {"seed", c.seed},
                {"count", c.size()},
                {"splits", {{"train", c.train.size()}, {"val", c.val.size()}, {"test", c.test.size()}}},
                {"params", to_json(c.params)},
                {"statistics", to_json(c.stats)},
                {"feature_sets", "1,2,3,4"}};
  write_json_file(dir + "/manifest.json", manifest, 2);
  write_text_file(dir + "/statistics.txt", statistics_report(c));
}

inline std::vector<CorpusRecord> read_split(const std::string& dir, const std::string& name) {
  const std::string path = dir + "/" + name + ".json";
  const Json j = read_json_file(path);
  const Json& recs = detail::field(j, "records", "$");
  if (!recs.is_array()) throw invalid_input("schema violation at $.records in '" + path + "': expected array");
  std::vector<CorpusRecord> out;
  out.reserve(recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) out.push_back(corpus_record_from_json(recs[k], "$.records[" + std::to_string(k) + "]"));
  return out;
}

inline Corpus read_corpus(const std::string& dir) {
  const Json manifest = read_json_file(dir + "/manifest.json");
  Corpus c;
  c.seed = detail::field(manifest, "seed", "$").get<std::uint64_t>();
  c.params = gen_params_from_json(detail::field(manifest, "params", "$"), "$.params");
  c.train = read_split(dir, "train");
  c.val = read_split(dir, "val");
  c.test = read_split(dir, "test");
  std::vector<const CorpusRecord*> all;
  for (const auto* split : {&c.train, &c.val, &c.test})
    for (const auto& r : *split) all.push_back(&r);
  c.stats = corpus_stats(all);
  if (manifest.contains("statistics") && manifest["statistics"].contains("truncated_chain_codes")) {
    c.stats.truncated_codes = manifest["statistics"]["truncated_chain_codes"].get<std::size_t>();
  }
  return c;
}

}  // namespace itl
