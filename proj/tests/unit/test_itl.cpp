#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "itl/floorplan/task.hpp"
#include "itl/model/checkpoint.hpp"
#include "itl/model/model.hpp"
#include "itl/synthgen/generator.hpp"
#include "support/oracles.hpp"

namespace {

using namespace itl_test;

void expect_close(const Tensor& a, const Tensor& b, double tol, const std::string& what) {
  ASSERT_EQ(a.rows(), b.rows()) << what;
  ASSERT_EQ(a.cols(), b.cols()) << what;
  for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], tol) << what << " entry " << k;
}

using itl::ItlConfig;
using itl::MultiAdjacency;
using itl::ParamSet;
using itl::Relation;
using itl::Tensor;
using itl::Variant;

TEST(TopologyUpdate, MatchesLoopReference) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 21);
  itl::Rng rng(5);
  const Tensor x = random_tensor(4, 5, rng);
  const MultiAdjacency a = random_soft_adjacency(4, rng);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const auto out = itl::model::update_topology(t.constant(x), itl::model::constant_adjacency(t, a), p, cfg, "block0");
  const MultiAdjacency ref = ref_update_topology(ps, cfg, "block0", x, a);
  expect_close(out.door.value(), ref.door, 1e-12, "door");
  expect_close(out.wall.value(), ref.wall, 1e-12, "wall");
  expect_close(out.spatial.value(), ref.spatial, 1e-12, "spatial");
}

TEST(TopologyUpdate, SymmetricWithUnitDiagonalAndClampedSpatial) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 3);
  itl::Rng rng(9);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const auto out = itl::model::update_topology(t.constant(random_tensor(6, 5, rng, 3.0)),
                                               itl::model::constant_adjacency(t, random_soft_adjacency(6, rng)), p, cfg, "block1");
  for (const auto* m : {&out.door.value(), &out.wall.value(), &out.spatial.value()}) {
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_EQ((*m)(i, i), 1.0);
      for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_EQ((*m)(i, j), (*m)(j, i));
        EXPECT_GE((*m)(i, j), 0.0);
        EXPECT_LE((*m)(i, j), 1.0);
      }
    }
  }
}

// Zero every weight of a scoring or decoder MLP and put the probability in the
// last bias.
void pin_pair_mlp(ParamSet& ps, const std::string& prefix, double logit) {
  for (auto& [name, value] : ps)
    if (name.rfind(prefix + ".", 0) == 0) value.fill(0.0);
  ps.at(prefix + ".b3").fill(logit);
}

TEST(TopologyUpdate, SpatialChannelSaturatesAtOne) {
  const ItlConfig cfg = small_config();
  ParamSet ps = itl::model::init_params(cfg, 4, 3);
  pin_pair_mlp(ps, "block0.score.door", 40.0);  // sigmoid rounds to exactly 1
  pin_pair_mlp(ps, "block0.score.wall", std::log(0.3 / 0.7));
  itl::Rng rng(1);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const auto out = itl::model::update_topology(t.constant(random_tensor(3, 5, rng)),
                                               itl::model::constant_adjacency(t, MultiAdjacency::identity(3)), p, cfg, "block0");
  EXPECT_EQ(out.door.value()(0, 1), 1.0);
  EXPECT_NEAR(out.wall.value()(0, 1), 0.3, 1e-12);
  EXPECT_EQ(out.spatial.value()(0, 1), 1.0);
}

TEST(Decoder, FusesDoorAndWallWithClamp) {
  const ItlConfig cfg = small_config();
  ParamSet ps = itl::model::init_params(cfg, 4, 8);
  itl::Rng rng(2);
  const Tensor x0 = random_tensor(3, 4, rng);
  const Tensor xk = random_tensor(3, 5, rng);
  auto run = [&](double pd, double pw) {
    pin_pair_mlp(ps, "dec.door", pd);
    pin_pair_mlp(ps, "dec.wall", pw);
    itl::ad::Tape t;
    const auto p = bind_constants(t, ps);
    const auto o = itl::model::decode(t.constant(xk), t.constant(x0), p, cfg);
    return std::array<double, 3>{o.door.value()(0, 2), o.wall.value()(0, 2), o.spatial.value()(0, 2)};
  };
  const auto hi = run(std::log(0.9 / 0.1), std::log(0.4 / 0.6));
  EXPECT_NEAR(hi[0], 0.9, 1e-12);
  EXPECT_NEAR(hi[1], 0.4, 1e-12);
  EXPECT_EQ(hi[2], 1.0);
  const auto lo = run(-800.0, -800.0);
  EXPECT_EQ(lo[2], 0.0);
}

TEST(Decoder, MatchesLoopReferenceAndIsSymmetric) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 13);
  itl::Rng rng(4);
  const Tensor x0 = random_tensor(5, 4, rng);
  const Tensor xk = random_tensor(5, 5, rng);
  Tensor h(5, 9);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t c = 0; c < 5; ++c) h(i, c) = xk(i, c);
    for (std::size_t c = 0; c < 4; ++c) h(i, 5 + c) = x0(i, c);
  }
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const auto o = itl::model::decode(t.constant(xk), t.constant(x0), p, cfg);
  for (Relation r : {Relation::door, Relation::wall}) {
    const Tensor ref = ref_sym_prob(ref_pair_logits(ps, std::string("dec.") + itl::relation_name(r), h, nullptr, 3, cfg.nonlinearity), false);
    expect_close(o.channel(r).value(), ref, 1e-12, itl::relation_name(r));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(o.channel(r).value()(i, j), o.channel(r).value()(j, i));
  }
}

TEST(Attention, MatchesLoopReferenceAndRowsSumToOne) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 17);
  itl::Rng rng(6);
  const Tensor x = random_tensor(5, 5, rng);
  const MultiAdjacency a = random_soft_adjacency(5, rng);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const Tensor beta = itl::model::attention_coefficients(t.constant(x), t.constant(a.door), p, "block0.attn.door", cfg).value();
  expect_close(beta, ref_attention(ps, "block0.attn.door", x, a.door, cfg), 1e-12, "beta");
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      s += beta(i, j);
      if (a.door(i, j) < cfg.tau) EXPECT_EQ(beta(i, j), 0.0);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Attention, SingleNeighbourGetsEverything) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 17);
  itl::Rng rng(6);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const Tensor beta = itl::model::attention_coefficients(t.constant(random_tensor(4, 5, rng)), t.constant(Tensor::identity(4)), p,
                                                         "block0.attn.wall", cfg).value();
  expect_close(beta, Tensor::identity(4), 0.0, "identity neighbourhood");
}

TEST(Attention, EqualLogitsSpreadUniformly) {
  const ItlConfig cfg = small_config();
  ParamSet ps = itl::model::init_params(cfg, 4, 17);
  ps.at("block0.attn.door.src").fill(0.0);
  ps.at("block0.attn.door.dst").fill(0.0);
  itl::Rng rng(6);
  const MultiAdjacency a = random_soft_adjacency(6, rng);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const Tensor beta = itl::model::attention_coefficients(t.constant(random_tensor(6, 5, rng)), t.constant(a.door), p,
                                                         "block0.attn.door", cfg).value();
  for (std::size_t i = 0; i < 6; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < 6; ++j) m += a.door(i, j) >= cfg.tau;
    for (std::size_t j = 0; j < 6; ++j)
      if (a.door(i, j) >= cfg.tau) EXPECT_NEAR(beta(i, j), 1.0 / m, 1e-15);
  }
}

TEST(NodeUpdate, MatchesLoopReference) {
  const ItlConfig cfg = small_config();
  ParamSet ps = itl::model::init_params(cfg, 4, 29);
  ps.at("block0.alpha") = Tensor(1, 2, {0.3, -0.4});
  itl::Rng rng(8);
  const Tensor x = random_tensor(5, 5, rng);
  const MultiAdjacency a = random_soft_adjacency(5, rng);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const auto u = itl::model::node_update(t.constant(x), itl::model::constant_adjacency(t, a), p, cfg, "block0");
  expect_close(u.x.value(), ref_node_update(ps, cfg, "block0", x, a), 1e-12, "X'");
  EXPECT_NEAR(u.mixing.value()(0, 0) + u.mixing.value()(0, 1), 1.0, 1e-15);
}

TEST(NodeUpdate, DominantRelationReducesToSingleRelationGat) {
  const ItlConfig cfg = small_config();
  ParamSet ps = itl::model::init_params(cfg, 4, 29);
  ps.at("block0.alpha") = Tensor(1, 2, {1000.0, -1000.0});
  itl::Rng rng(8);
  const Tensor x = random_tensor(5, 5, rng);
  const MultiAdjacency a = random_soft_adjacency(5, rng);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const Tensor got = itl::model::node_update(t.constant(x), itl::model::constant_adjacency(t, a), p, cfg, "block0").x.value();
  // act((beta_door o A_door) X W_door) by hand.
  const Tensor beta = ref_attention(ps, "block0.attn.door", x, a.door, cfg);
  const Tensor& W = ps.at("block0.w.door");
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t o = 0; o < 5; ++o) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t h = 0; h < 5; ++h) s += beta(i, j) * a.door(i, j) * x(j, h) * W(h, o);
      EXPECT_NEAR(got(i, o), act(s, cfg.nonlinearity), 1e-12);
    }
}

TEST(NodeUpdate, SelfLoopsOnlyKeepNodesIndependent) {
  const ItlConfig cfg = small_config();
  const ParamSet ps = itl::model::init_params(cfg, 4, 31);
  itl::Rng rng(10);
  Tensor x = random_tensor(4, 5, rng);
  const MultiAdjacency a = MultiAdjacency::identity(4);
  auto run = [&](const Tensor& in) {
    itl::ad::Tape t;
    const auto p = bind_constants(t, ps);
    return itl::model::node_update(t.constant(in), itl::model::constant_adjacency(t, a), p, cfg, "block0").x.value();
  };
  const Tensor before = run(x);
  for (std::size_t h = 0; h < 5; ++h) x(2, h) += 1.5;
  const Tensor after = run(x);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t o = 0; o < 5; ++o) {
      if (i == 2) continue;
      EXPECT_EQ(before(i, o), after(i, o)) << "node " << i;
    }
}

TEST(Encoder, ZeroIterationsPassThrough) {
  ItlConfig cfg = small_config();
  cfg.k_iterations = 0;
  itl::Rng rng(3);
  const Tensor x = random_tensor(4, 4, rng);
  const MultiAdjacency a = random_soft_adjacency(4, rng);
  itl::ad::Tape t;
  const auto enc = itl::model::encode(t.constant(x), itl::model::constant_adjacency(t, a), {}, cfg);
  EXPECT_EQ(enc.x.value(), x);
  EXPECT_EQ(enc.a.door.value(), a.door);
  EXPECT_TRUE(enc.per_iteration.empty());
}

TEST(Encoder, TwoIterationsGiveTwoIntermediateTopologies) {
  const ItlConfig cfg = small_config();
  const auto inst = plan_instance(4);
  const ParamSet ps = itl::model::init_params(cfg, 4, 1);
  const auto pred = itl::model::predict(inst, ps, cfg);
  ASSERT_EQ(pred.per_iteration.size(), 2u);
  ASSERT_EQ(pred.mixing.size(), 2u);
  for (const auto& m : pred.per_iteration) EXPECT_EQ(m.door.rows(), inst.n());
  // Second block reproduced from the loop reference.
  Tensor h(inst.n(), 5);
  const Tensor& proj = ps.at("proj.w");
  for (std::size_t i = 0; i < inst.n(); ++i)
    for (std::size_t o = 0; o < 5; ++o)
      for (std::size_t f = 0; f < 4; ++f) h(i, o) += inst.features.x(i, f) * proj(f, o);
  const MultiAdjacency a1 = ref_update_topology(ps, cfg, "block0", h, inst.a0);
  expect_close(pred.per_iteration[0].spatial, a1.spatial, 1e-12, "A1");
  const Tensor h1 = ref_node_update(ps, cfg, "block0", h, a1);
  expect_close(pred.per_iteration[1].door, ref_update_topology(ps, cfg, "block1", h1, a1).door, 1e-12, "A2");
}

TEST(Forward, DeterministicAcrossCalls) {
  const ItlConfig cfg = small_config();
  const auto inst = plan_instance(7);
  const ParamSet ps = itl::model::init_params(cfg, 4, 2);
  const auto a = itl::model::predict(inst, ps, cfg);
  const auto b = itl::model::predict(inst, ps, cfg);
  EXPECT_EQ(a.p_spatial, b.p_spatial);
  EXPECT_EQ(itl::model::init_params(cfg, 4, 2), ps);
}

TEST(Forward, NoIlEqualsZeroIterations) {
  ItlConfig no_il = small_config(Variant::no_il);
  ItlConfig k0 = small_config();
  k0.k_iterations = 0;
  const auto inst = plan_instance(11);
  const ParamSet a = itl::model::init_params(no_il, 4, 5);
  const ParamSet b = itl::model::init_params(k0, 4, 5);
  ASSERT_EQ(a, b);
  EXPECT_EQ(itl::model::predict(inst, a, no_il).p_spatial, itl::model::predict(inst, b, k0).p_spatial);
}

TEST(Forward, NoMrGatScoresSpatialOnly) {
  const ItlConfig cfg = small_config(Variant::no_mr_gat);
  const ParamSet ps = itl::model::init_params(cfg, 4, 5);
  for (const auto& [name, value] : ps) {
    if (name.rfind("block", 0) != 0) continue;
    EXPECT_EQ(name.find(".door"), std::string::npos) << name;
    EXPECT_EQ(name.find(".wall"), std::string::npos) << name;
  }
  const auto pred = itl::model::predict(plan_instance(2), ps, cfg);
  ASSERT_EQ(pred.per_iteration.size(), 2u);
  EXPECT_EQ(pred.per_iteration[0].door.size(), 0u);
  EXPECT_GT(pred.per_iteration[0].spatial.size(), 0u);
  EXPECT_TRUE(pred.mixing.empty());
}

TEST(Forward, NoMrDecoderPredictsSpatialDirectly) {
  const ItlConfig cfg = small_config(Variant::no_mr_decoder);
  const ParamSet ps = itl::model::init_params(cfg, 4, 5);
  EXPECT_TRUE(ps.count("dec.spatial.wi"));
  const auto inst = plan_instance(2);
  const auto pred = itl::model::predict(inst, ps, cfg);
  // Not the clamped sum.
  bool differs = false;
  for (std::size_t k = 0; k < pred.p_spatial.size(); ++k)
    differs |= std::abs(pred.p_spatial[k] - std::min(1.0, pred.p_door[k] + pred.p_wall[k])) > 1e-6;
  EXPECT_TRUE(differs);
}

TEST(Forward, TwoRoomPlanIsFinite) {
  itl::GenParams gp;
  gp.min_rooms = gp.max_rooms = 2;
  const auto fp = itl::generate_floorplan(gp, 1, "two");
  itl::FeatureMatrix fm;
  itl::Rng rng(0);
  fm.x = random_tensor(2, 4, rng);
  fm.layout = {{"basic", 0, 4}};
  const auto inst = itl::make_generation_instance(fp.id, fm, itl::build_graph(fp));
  for (Variant v : {Variant::full, Variant::no_il, Variant::no_mr_gat, Variant::no_mr_decoder, Variant::mlp, Variant::gat_knn}) {
    const ItlConfig cfg = small_config(v);
    const auto pred = itl::model::predict(inst, itl::model::init_params(cfg, 4, 3), cfg);
    EXPECT_TRUE(pred.p_spatial.all_finite()) << itl::variant_name(v);
    EXPECT_EQ(pred.p_spatial(0, 1), pred.p_spatial(1, 0));
  }
}

TEST(Forward, PermutationEquivariantForEveryVariant) {
  for (Variant v : {Variant::full, Variant::no_il, Variant::no_mr_gat, Variant::no_mr_decoder, Variant::mlp, Variant::gat_knn}) {
    const ItlConfig cfg = small_config(v);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto inst = plan_instance(100 + s);
      const ParamSet ps = itl::model::init_params(cfg, 4, s);
      std::vector<std::size_t> perm(inst.n());
      std::iota(perm.begin(), perm.end(), 0);
      itl::Rng rng(s);
      rng.shuffle(std::span<std::size_t>(perm));
      itl::TaskInstance q = inst;
      q.features.x = permute(inst.features.x, perm, false);
      q.a0 = permute(inst.a0, perm);
      q.target = permute(inst.target, perm);
      const auto a = itl::model::predict(inst, ps, cfg);
      const auto b = itl::model::predict(q, ps, cfg);
      expect_close(b.p_spatial, permute(a.p_spatial, perm, true), 1e-10,
                   std::string(itl::variant_name(v)) + " fixture " + std::to_string(s));
      expect_close(b.p_door, permute(a.p_door, perm, true), 1e-10, "door");
    }
  }
}

TEST(Baselines, MlpIgnoresInitialTopology) {
  const ItlConfig cfg = small_config(Variant::mlp);
  auto inst = plan_instance(12);
  const ParamSet ps = itl::model::init_params(cfg, 4, 3);
  const auto a = itl::model::predict(inst, ps, cfg);
  itl::Rng rng(1);
  inst.a0 = random_soft_adjacency(inst.n(), rng);
  EXPECT_EQ(itl::model::predict(inst, ps, cfg).p_spatial, a.p_spatial);
}

TEST(Baselines, KnnWithAllNeighboursIsFullyConnectedGat) {
  ItlConfig cfg = small_config(Variant::gat_knn);
  const auto inst = plan_instance(13);
  const std::size_t n = inst.n();
  cfg.knn_k = static_cast<int>(n - 1);
  const ParamSet ps = itl::model::init_params(cfg, 4, 3);
  itl::ad::Tape t;
  const auto p = bind_constants(t, ps);
  const Tensor got = itl::model::gat_knn_encoder(t, t.constant(inst.features.x), p, cfg).value();
  const Tensor full(n, n, 1.0);
  const Tensor beta = ref_attention(ps, "gat.attn", inst.features.x, full, cfg);
  const Tensor& W = ps.at("gat.w");
  Tensor ref(n, W.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < W.cols(); ++o) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t f = 0; f < 4; ++f) s += beta(i, j) * inst.features.x(j, f) * W(f, o);
      ref(i, o) = act(s, cfg.nonlinearity);
    }
  expect_close(got, ref, 1e-12, "gat");
  // A larger k is capped, not rejected.
  cfg.knn_k = 50;
  EXPECT_NO_THROW(itl::model::predict(inst, ps, cfg));
}

TEST(Params, SharedBlocksHaveOneBlock) {
  ItlConfig cfg = small_config();
  cfg.share_block_weights = true;
  const ParamSet ps = itl::model::init_params(cfg, 4, 0);
  EXPECT_TRUE(ps.count("block.alpha"));
  EXPECT_FALSE(ps.count("block0.alpha"));
  cfg.long_skip = false;
  EXPECT_EQ(itl::model::init_params(cfg, 4, 0).at("dec.door.wi").rows(), 5u);
  cfg.long_skip = true;
  EXPECT_EQ(itl::model::init_params(cfg, 4, 0).at("dec.door.wi").rows(), 9u);
}

TEST(Checkpoint, JsonRoundTripIsExact) {
  itl::Checkpoint c;
  c.config = small_config(Variant::no_mr_decoder);
  c.feature_layout = {{"basic", 0, 20}, {"distance", 20, 25}};
  c.standardization.mean = {0.1, 0.2, 0.3, 0.4, 1.0 / 3.0};
  c.standardization.stddev = {1, 2, 3, 4, 5};
  c.params = itl::model::init_params(c.config, 25, 77);
  const auto back = itl::checkpoint_from_json(itl::Json::parse(itl::to_json(c).dump()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.sets().to_string(), "1,2");
}

TEST(Checkpoint, UnknownFormatIsIncompatible) {
  itl::Checkpoint c;
  c.config = small_config();
  c.params = itl::model::init_params(c.config, 3, 1);
  itl::Json j = itl::to_json(c);
  j["format_version"] = 99;
  try {
    itl::checkpoint_from_json(j);
    FAIL();
  } catch (const itl::Error& e) {
    EXPECT_EQ(e.kind(), itl::ErrorKind::incompatible);
  }
}

}  // namespace
