// Copyright 2026 The hubojoin Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hubojoin/baselines.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace hubojoin {
namespace {

QueryGraph random_graph(Shape s, int n, std::uint64_t seed) {
  return sample_statistics(generate_shape(s, n, seed), 10, 50, seed + 100);
}

TEST(DpWithCross, Examples) {
  EXPECT_NEAR(dp_with_cross(fixtures::chain3()).cost, 360.0, 1e-9);
  EXPECT_NEAR(dp_with_cross(fixtures::single_edge()).cost, 5.0, 1e-12);
  const Plan star = dp_with_cross(fixtures::star3());
  EXPECT_EQ(star.order, (std::vector<RelationId>{0, 2, 1}));
  EXPECT_NEAR(star.cost, 330.0, 1e-9);
}

// Large center, two small leaves: the leaf x leaf cross product wins.
TEST(DpWithCross, CanBeatCrossFreeOnStar) {
  const QueryGraph g(Shape::kStar, {50, 10, 10}, {{0, 1, 1.0}, {0, 2, 1.0}});
  EXPECT_NEAR(dp_with_cross(g).cost, 5100.0, 1e-9);
  EXPECT_NEAR(dp_without_cross(g).cost, 5500.0, 1e-9);
}

TEST(DpWithoutCross, Examples) {
  EXPECT_NEAR(dp_without_cross(fixtures::chain3()).cost, 360.0, 1e-9);
  EXPECT_NEAR(dp_without_cross(fixtures::star3()).cost, 330.0, 1e-9);
}

TEST(Greedy, Examples) {
  const Plan chain = greedy_without_cross(fixtures::chain3());
  EXPECT_EQ(chain.order, (std::vector<RelationId>{1, 2, 0}));
  EXPECT_NEAR(chain.cost, 360.0, 1e-9);
  const Plan star = greedy_without_cross(fixtures::star3());
  EXPECT_EQ(star.order, (std::vector<RelationId>{0, 2, 1}));
  EXPECT_NEAR(star.cost, 330.0, 1e-9);
}

TEST(Baselines, AgreeWithBruteForce) {
  for (Shape s : {Shape::kChain, Shape::kStar, Shape::kCycle, Shape::kTree, Shape::kClique}) {
    for (int n = 2 + (s == Shape::kCycle); n <= 7; ++n) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const QueryGraph g = random_graph(s, n, seed);
        const Plan cross = dp_with_cross(g);
        const Plan nocross = dp_without_cross(g);
        const Plan greedy = greedy_without_cross(g);
        EXPECT_TRUE(oracle::rel_eq(cross.cost, oracle::min_cost(g, false)));
        EXPECT_TRUE(oracle::rel_eq(nocross.cost, oracle::min_cost(g, true)));
        EXPECT_TRUE(oracle::rel_eq(cross.cost, oracle::order_cost(g, cross.order)));
        EXPECT_TRUE(oracle::rel_eq(nocross.cost, oracle::order_cost(g, nocross.order)));
        EXPECT_TRUE(oracle::rel_eq(greedy.cost, oracle::order_cost(g, greedy.order)));
        EXPECT_TRUE(adheres(nocross.tree, g));
        EXPECT_TRUE(adheres(greedy.tree, g));
        EXPECT_LE(cross.cost, nocross.cost * (1 + 1e-12));
        EXPECT_LE(nocross.cost, greedy.cost * (1 + 1e-12));
        if (s == Shape::kStar) EXPECT_TRUE(oracle::rel_eq(greedy.cost, nocross.cost));
      }
    }
  }
}

TEST(DpWithoutCross, MatchesSubsetTable) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const QueryGraph g = random_graph(Shape::kTree, 12, seed);
    const Plan a = dp_without_cross(g);
    const Plan b = detail::dp_left_deep(g, false);
    EXPECT_EQ(a.order, b.order);
    EXPECT_TRUE(oracle::rel_eq(a.cost, b.cost));
  }
}

TEST(Baselines, SizeCaps) {
  const QueryGraph chain = random_graph(Shape::kChain, 40, 1);
  try {
    dp_with_cross(chain);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSizeCap);
  }
  // Sparse shapes stay within the connected-subset budget.
  EXPECT_TRUE(adheres(dp_without_cross(chain).tree, chain));
  EXPECT_THROW(dp_without_cross(random_graph(Shape::kStar, 30, 1)), Error);
}

}  // namespace
}  // namespace hubojoin
