#pragma once

#include <string>
#include <vector>

#include "itl/floorplan/io.hpp"

namespace itl {

/// Model family. The first four are ITL and its ablations; the last two are
/// the baselines that share ITL's decoder.
enum class Variant { full, no_il, no_mr_gat, no_mr_decoder, mlp, gat_knn };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_il: return "no_il";
    case Variant::no_mr_gat: return "no_mr_gat";
    case Variant::no_mr_decoder: return "no_mr_decoder";
    case Variant::mlp: return "mlp";
    case Variant::gat_knn: return "gat_knn";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::full, Variant::no_il, Variant::no_mr_gat, Variant::no_mr_decoder, Variant::mlp, Variant::gat_knn})
    if (s == variant_name(v)) return v;
  throw invalid_input("unknown variant '" + s + "' (expected full, no_il, no_mr_gat, no_mr_decoder, mlp or gat_knn)");
}

enum class Nonlinearity { elu, relu, tanh };

inline const char* nonlinearity_name(Nonlinearity n) {
  return n == Nonlinearity::elu ? "elu" : n == Nonlinearity::relu ? "relu" : "tanh";
}

inline Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "elu") return Nonlinearity::elu;
  if (s == "relu") return Nonlinearity::relu;
  if (s == "tanh") return Nonlinearity::tanh;
  throw invalid_input("unknown nonlinearity '" + s + "' (expected elu, relu or tanh)");
}

struct ItlConfig {
  int k_iterations = 2;
  int gat_hidden = 32;
  std::vector<int> scoring_mlp_dims{32, 16, 1};
  std::vector<int> decoder_mlp_dims{64, 16, 1};
  bool share_block_weights = false;
  bool long_skip = true;
  Variant variant = Variant::full;
  Nonlinearity nonlinearity = Nonlinearity::elu;
  double attention_leak = 0.2;
  double tau = 0.01;        // soft-neighbourhood threshold for attention
  int knn_k = 3;            // gat_knn only
  int mlp_hidden = 32;      // mlp only

  /// Number of encoder blocks actually run.
  int effective_k() const {
    if (variant == Variant::no_il || variant == Variant::mlp || variant == Variant::gat_knn) return 0;
    return k_iterations;
  }
  bool is_baseline() const { return variant == Variant::mlp || variant == Variant::gat_knn; }
  bool use_long_skip() const { return long_skip && !is_baseline() && effective_k() > 0; }

  void validate() const {
    if (k_iterations < 0) throw invalid_input("k_iterations must be >= 0");
    if (gat_hidden <= 0 || mlp_hidden <= 0) throw invalid_input("hidden sizes must be positive");
    for (const auto* dims : {&scoring_mlp_dims, &decoder_mlp_dims}) {
      if (dims->empty() || dims->back() != 1) throw invalid_input("MLP dims must be non-empty and end in 1");
      for (int d : *dims)
        if (d <= 0) throw invalid_input("MLP dims must be positive");
    }
    if (!(tau >= 0.0 && tau < 1.0)) throw invalid_input("tau must lie in [0, 1)");
    if (!(attention_leak >= 0.0)) throw invalid_input("attention_leak must be >= 0");
    if (knn_k <= 0) throw invalid_input("knn_k must be positive");
  }

  bool operator==(const ItlConfig&) const = default;
};

inline Json to_json(const ItlConfig& c) {
  return Json{{"k_iterations", c.k_iterations},
              {"gat_hidden", c.gat_hidden},
              {"scoring_mlp_dims", c.scoring_mlp_dims},
              {"decoder_mlp_dims", c.decoder_mlp_dims},
              {"share_block_weights", c.share_block_weights},
              {"long_skip", c.long_skip},
              {"variant", variant_name(c.variant)},
              {"nonlinearity", nonlinearity_name(c.nonlinearity)},
              {"attention_leak", c.attention_leak},
              {"tau", c.tau},
              {"knn_k", c.knn_k},
              {"mlp_hidden", c.mlp_hidden}};
}

inline ItlConfig itl_config_from_json(const Json& j, const std::string& path = "$") {
  using namespace detail;
  ItlConfig c;
  c.k_iterations = as_int(field(j, "k_iterations", path), path + ".k_iterations");
  c.gat_hidden = as_int(field(j, "gat_hidden", path), path + ".gat_hidden");
  c.scoring_mlp_dims = as_int_list(field(j, "scoring_mlp_dims", path), path + ".scoring_mlp_dims");
  c.decoder_mlp_dims = as_int_list(field(j, "decoder_mlp_dims", path), path + ".decoder_mlp_dims");
  c.share_block_weights = field(j, "share_block_weights", path).get<bool>();
  c.long_skip = field(j, "long_skip", path).get<bool>();
  c.variant = parse_variant(field(j, "variant", path).get<std::string>());
  c.nonlinearity = parse_nonlinearity(field(j, "nonlinearity", path).get<std::string>());
  c.attention_leak = as_double(field(j, "attention_leak", path), path + ".attention_leak");
  c.tau = as_double(field(j, "tau", path), path + ".tau");
  c.knn_k = as_int(field(j, "knn_k", path), path + ".knn_k");
  c.mlp_hidden = as_int(field(j, "mlp_hidden", path), path + ".mlp_hidden");
  c.validate();
  return c;
}

}  // namespace itl
