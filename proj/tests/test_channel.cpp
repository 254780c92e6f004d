#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wugnn/channel.hpp"
#include "wugnn/errors.hpp"

namespace wugnn {
namespace {

using channel::ChannelConfig;
using channel::NormScheme;

TEST(GenerateInstance, SingleUserShapeAndSign) {
  ChannelConfig c;
  c.n = 1;
  c.seed = 7;
  const auto inst = channel::generate_instance(c);
  ASSERT_EQ(inst.n(), 1u);
  ASSERT_EQ(inst.gains().size(), 1u);
  EXPECT_GE(inst.gain(0, 0), 0.0);
}

TEST(GenerateInstance, SameConfigSameGains) {
  ChannelConfig c;
  c.n = 10;
  c.seed = 42;
  EXPECT_EQ(channel::generate_instance(c), channel::generate_instance(c));
  const auto first = channel::generate_instance(c);
  c.seed = 43;
  EXPECT_NE(channel::generate_instance(c).gains()[0], first.gains()[0]);
}

TEST(GenerateInstance, AllGainsNonnegative) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = testing::random_instance(6, seed);
    for (double g : inst.gains()) ASSERT_GE(g, 0.0);
  }
}

TEST(GenerateInstance, UnitMeanPowerGain) {
  // Monte-Carlo estimate of E[h^2] over 10^4 seeds.
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto inst = testing::random_instance(10, seed);
    for (double g : inst.gains()) {
      sum += g * g;
      ++count;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(count), 1.0, 0.05);
}

TEST(GenerateInstance, AmplitudesFollowRayleigh) {
  // Rayleigh(sigma = 1/sqrt(2)): E[h] = sqrt(pi) / 2, P(h^2 > 1) = e^-1.
  double sum = 0.0, above = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto inst = testing::random_instance(10, seed);
    for (double g : inst.gains()) {
      sum += g;
      above += g * g > 1.0 ? 1.0 : 0.0;
      ++count;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(count), std::sqrt(M_PI) / 2.0, 0.01);
  EXPECT_NEAR(above / static_cast<double>(count), std::exp(-1.0), 0.01);
}

TEST(GenerateInstance, InvalidConfigRejected) {
  ChannelConfig c;
  c.n = 0;
  EXPECT_THROW(channel::generate_instance(c), ConfigError);
  c = ChannelConfig{};
  c.noise_power = 0.0;
  EXPECT_THROW(channel::generate_instance(c), ConfigError);
  c = ChannelConfig{};
  c.p_max = -1.0;
  EXPECT_THROW(channel::generate_instance(c), ConfigError);
}

TEST(NetworkInstance, RejectsNegativeGainsAndBadSizes) {
  EXPECT_THROW(channel::NetworkInstance(2, {1.0, -0.5, 0.2, 1.0}, 1.0, 1.0), ArgumentError);
  EXPECT_THROW(channel::NetworkInstance(2, {1.0, 0.5, 0.2}, 1.0, 1.0), ArgumentError);
  EXPECT_THROW(channel::NetworkInstance(1, {1.0}, 0.0, 1.0), ArgumentError);
}

TEST(BuildGraph, SingleNodeHasNoEdges) {
  const auto g = channel::build_graph(testing::random_instance(1, 3));
  EXPECT_EQ(g.n, 1u);
  EXPECT_EQ(g.num_edges(), 0u);
}

TEST(BuildGraph, ThreeNodesSixDirectedEdges) {
  const auto g = channel::build_graph(testing::random_instance(3, 3));
  EXPECT_EQ(g.n, 3u);
  EXPECT_EQ(g.num_edges(), 6u);
}

TEST(BuildGraph, DirectGainFeatureCopied) {
  const auto inst = testing::random_instance(3, 11);
  const auto g = channel::build_graph(inst);
  EXPECT_EQ(g.direct_gain_feature(2), inst.gain(2, 2));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(g.node_features[i * 3 + 1], inst.noise_power());
    EXPECT_EQ(g.node_features[i * 3 + 2], inst.p_max());
  }
}

TEST(BuildGraph, EdgeGainMatchesInstance) {
  const auto inst = testing::random_instance(7, 5);
  const auto g = channel::build_graph(inst);
  ASSERT_EQ(g.num_edges(), 42u);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    ASSERT_NE(g.src[e], g.dst[e]);
    EXPECT_EQ(g.edge_features[e], inst.gain(g.dst[e], g.src[e]));
  }
}

TEST(BuildGraph, SparsifierDropsWeakLinks) {
  const auto inst = testing::make_instance(3, {1.0, 0.05, 0.5, 0.2, 1.0, 0.01, 0.9, 0.3, 1.0});
  const auto g = channel::build_graph(inst, 0.1);
  EXPECT_EQ(g.num_edges(), 4u);
  for (std::size_t e = 0; e < g.num_edges(); ++e) EXPECT_GE(g.edge_features[e], 0.1);
}

TEST(BuildGraph, RelabelingCommutes) {
  const auto inst = testing::random_instance(5, 17);
  const auto perm = testing::random_permutation(5, 99);
  const auto g = channel::build_graph(inst);
  const auto gp = channel::build_graph(channel::permute_instance(inst, perm));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(gp.direct_gain_feature(perm[i]), g.direct_gain_feature(i));
  }
  // Every edge j -> i of g shows up as perm[j] -> perm[i] in gp with the same gain.
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    bool found = false;
    for (std::size_t f = 0; f < gp.num_edges(); ++f) {
      if (gp.src[f] == perm[g.src[e]] && gp.dst[f] == perm[g.dst[e]]) {
        EXPECT_EQ(gp.edge_features[f], g.edge_features[e]);
        found = true;
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(NormalizeFeatures, Log1pOfZeroIsZero) {
  auto inst = testing::make_instance(2, {0.0, 0.0, 0.0, 0.0});
  const auto g = channel::normalize_features(channel::build_graph(inst), NormScheme::log1p);
  EXPECT_EQ(g.direct_gain_feature(0), 0.0);
  EXPECT_EQ(g.edge_features[0], 0.0);
}

TEST(NormalizeFeatures, Log1pOfEMinusOneIsOne) {
  const double x = std::exp(1.0) - 1.0;
  auto inst = testing::make_instance(2, {x, x, x, x});
  const auto g = channel::normalize_features(channel::build_graph(inst), NormScheme::log1p);
  EXPECT_NEAR(g.direct_gain_feature(1), 1.0, 1e-15);
  EXPECT_NEAR(g.edge_features[1], 1.0, 1e-15);
}

TEST(NormalizeFeatures, IdentityLeavesGraphUnchanged) {
  const auto g = channel::build_graph(testing::random_instance(4, 8));
  const auto same = channel::normalize_features(g, NormScheme::identity);
  EXPECT_EQ(same.node_features, g.node_features);
  EXPECT_EQ(same.edge_features, g.edge_features);
  EXPECT_EQ(same.src, g.src);
  EXPECT_EQ(same.dst, g.dst);
}

TEST(NormalizeFeatures, AdjacencyUnchanged) {
  const auto g = channel::build_graph(testing::random_instance(4, 8));
  const auto norm = channel::normalize_features(g);
  EXPECT_EQ(norm.src, g.src);
  EXPECT_EQ(norm.dst, g.dst);
}

TEST(NormalizeFeatures, NodesOnlyScopeSkipsEdges) {
  const auto g = channel::build_graph(testing::random_instance(4, 8));
  const auto norm = channel::normalize_features(g, NormScheme::log1p, channel::FeatureScope::nodes_only);
  EXPECT_EQ(norm.direct_gain_feature(0), std::log1p(g.direct_gain_feature(0)));
  EXPECT_EQ(norm.edge_features, g.edge_features);
}

TEST(PermuteInstance, MovesGains) {
  const auto inst = testing::random_instance(4, 2);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  const auto p = channel::permute_instance(inst, perm);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(p.gain(perm[i], perm[j]), inst.gain(i, j));
  }
  EXPECT_THROW(channel::permute_instance(inst, std::vector<std::size_t>{0, 0, 1, 2}), ArgumentError);
}

}  // namespace
}  // namespace wugnn
