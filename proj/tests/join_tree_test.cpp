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

#include "hubojoin/join_tree.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace hubojoin {
namespace {

using J = JoinTree;

TEST(Cardinality, Leaf) { EXPECT_EQ(cardinality(J::leaf(0), fixtures::chain3()), 10.0); }

TEST(Cardinality, SingleJoin) {
  EXPECT_DOUBLE_EQ(cardinality(J::join(J::leaf(1), J::leaf(2)), fixtures::chain3()), 60.0);
}

TEST(Cardinality, IndependentOfOrder) {
  const QueryGraph g = fixtures::chain3();
  for (const auto& o : oracle::orders(g, false)) {
    EXPECT_NEAR(cardinality(leftdeep_from_order(o), g), 300.0, 1e-9);
  }
  // A bushy shape over the same set too.
  EXPECT_NEAR(cardinality(J::join(J::leaf(0), J::join(J::leaf(2), J::leaf(1))), g), 300.0, 1e-9);
}

TEST(Cost, Examples) {
  const QueryGraph g = fixtures::chain3();
  EXPECT_EQ(cost(J::leaf(2), g), 0.0);
  EXPECT_NEAR(cost(leftdeep_from_order({1, 2, 0}), g), 360.0, 1e-9);
  EXPECT_NEAR(cost(leftdeep_from_order({0, 1, 2}), g), 400.0, 1e-9);
}

TEST(Cost, MatchesOracleOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const QueryGraph g = sample_statistics(generate_shape(Shape::kClique, 5, seed), 10, 50, seed);
    for (const auto& o : oracle::orders(g, false)) {
      const double want = oracle::order_cost(g, o);
      EXPECT_TRUE(oracle::rel_eq(cost(leftdeep_from_order(o), g), want));
      EXPECT_TRUE(oracle::rel_eq(order_cost(o, g), want));
      EXPECT_TRUE(oracle::rel_eq(std::exp(log_cost(leftdeep_from_order(o), g)), want, 1e-12));
    }
  }
}

TEST(Adheres, ChainExamples) {
  const QueryGraph g = fixtures::chain3();
  EXPECT_TRUE(adheres(leftdeep_from_order({0, 1, 2}), g));
  EXPECT_FALSE(adheres(leftdeep_from_order({0, 2, 1}), g));
  EXPECT_FALSE(adheres(leftdeep_from_order({0, 1}), g));
}

TEST(Adheres, AgreesWithOracle) {
  const QueryGraph g = sample_statistics(generate_shape(Shape::kTree, 6, 3), 10, 50, 3);
  for (const auto& o : oracle::orders(g, false)) {
    EXPECT_EQ(adheres(leftdeep_from_order(o), g), oracle::cross_free(g, o));
  }
}

TEST(JoinTree, LeftDeepAndRendering) {
  const J t = leftdeep_from_order({1, 2, 0});
  EXPECT_TRUE(t.is_left_deep());
  EXPECT_EQ(t.to_string(), "[[1,2],0]");
  EXPECT_EQ(t.leaves(), (std::vector<RelationId>{1, 2, 0}));
  EXPECT_FALSE(J::join(J::leaf(0), J::join(J::leaf(1), J::leaf(2))).is_left_deep());
}

TEST(JoinTree, RejectsDuplicates) {
  EXPECT_THROW(leftdeep_from_order({0, 1, 0}), Error);
}

}  // namespace
}  // namespace hubojoin
