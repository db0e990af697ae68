#pragma once

#include <string>
#include <vector>

#include "itl/diffcore/params.hpp"
#include "itl/features/feature_matrix.hpp"
#include "itl/model/config.hpp"

namespace itl {

inline constexpr int kCheckpointFormat = 1;

struct Checkpoint {
  ItlConfig config;
  std::vector<LayoutEntry> feature_layout;
  StandardizationStats standardization;
  ParamSet params;
  bool operator==(const Checkpoint&) const = default;

  AttributeSelection sets() const {
    std::string text;
    for (const LayoutEntry& e : feature_layout) {
      for (int k = 1; k <= 4; ++k)
        if (e.name == attribute_set_name(static_cast<AttributeSet>(k))) text += (text.empty() ? "" : ",") + std::to_string(k);
    }
    return AttributeSelection::parse(text);
  }
};

inline Json to_json(const Checkpoint& c) {
  Json layout = Json::array();
  for (const LayoutEntry& e : c.feature_layout) layout.push_back(Json{{"name", e.name}, {"begin", e.begin}, {"end", e.end}});
  Json params = Json::object();
  for (const auto& [name, t] : c.params) params[name] = tensor_to_json(t);
  return Json{{"format_version", kCheckpointFormat},
              {"config", to_json(c.config)},
              {"feature_layout", std::move(layout)},
              {"standardization_stats", Json{{"mean", c.standardization.mean}, {"stddev", c.standardization.stddev}}},
              {"params", std::move(params)}};
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  using namespace detail;
  const int version = as_int(field(j, "format_version", "$"), "$.format_version");
  if (version != kCheckpointFormat) {
    throw Error(ErrorKind::incompatible, "checkpoint format_version " + std::to_string(version) + " is not supported");
  }
  Checkpoint c;
  c.config = itl_config_from_json(field(j, "config", "$"), "$.config");
  const Json& layout = field(j, "feature_layout", "$");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const std::string path = "$.feature_layout[" + std::to_string(k) + "]";
    c.feature_layout.push_back({field(layout[k], "name", path).get<std::string>(),
                                static_cast<std::size_t>(as_int(field(layout[k], "begin", path), path + ".begin")),
                                static_cast<std::size_t>(as_int(field(layout[k], "end", path), path + ".end"))});
  }
  const Json& st = field(j, "standardization_stats", "$");
  c.standardization.mean = field(st, "mean", "$.standardization_stats").get<std::vector<double>>();
  c.standardization.stddev = field(st, "stddev", "$.standardization_stats").get<std::vector<double>>();
  const Json& params = field(j, "params", "$");
  for (auto it = params.begin(); it != params.end(); ++it) c.params[it.key()] = tensor_from_json(it.value(), "$.params." + it.key());
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) { write_json_file(path, to_json(c), -1); }

inline Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_json(read_json_file(path)); }

}  // namespace itl
