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

#include "hubojoin/formulation.hpp"

#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace hubojoin {
namespace {

VariableId x(int u, int v, int r) { return VariableId::join(u, v, r); }

QueryGraph random_graph(Shape s, int n, std::uint64_t seed) {
  return sample_statistics(generate_shape(s, n, seed), 10, 50, seed + 100);
}

Assignment zeros(const Problem& p) {
  Assignment z;
  for (const auto& v : p.variables()) z[v] = false;
  return z;
}

TEST(PreciseCost, ChainThreeTerms) {
  const CostHubo c = build_precise_cost(fixtures::chain3());
  EXPECT_EQ(c.poly.size(), 4U);
  EXPECT_NEAR(c.poly.coefficient({x(0, 1, 0)}), 100, 1e-9);
  EXPECT_NEAR(c.poly.coefficient({x(1, 2, 0)}), 60, 1e-9);
  EXPECT_NEAR(c.poly.coefficient({x(0, 1, 0), x(1, 2, 1)}), 300, 1e-9);
  EXPECT_NEAR(c.poly.coefficient({x(1, 2, 0), x(0, 1, 1)}), 300, 1e-9);
  EXPECT_EQ(c.poly.constant(), 0.0);
}

TEST(PreciseCost, EvaluatesPlansAndAllOnes) {
  const CostHubo c = build_precise_cost(fixtures::chain3());
  Assignment v = {{x(0, 1, 0), false}, {x(1, 2, 0), true}, {x(0, 1, 1), true}, {x(1, 2, 1), false}};
  EXPECT_NEAR(c.poly.evaluate(v), 360, 1e-9);
  for (auto& [k, bit] : v) bit = true;
  EXPECT_NEAR(c.poly.evaluate(v), 760, 1e-9);
}

TEST(PreciseCost, SingleEdgeIsOneLinearTerm) {
  const CostHubo c = build_precise_cost(fixtures::single_edge());
  ASSERT_EQ(c.poly.size(), 1U);
  EXPECT_NEAR(c.poly.coefficient({x(0, 1, 0)}), 0.25 * 4 * 5, 1e-12);
}

TEST(PreciseCost, CoefficientsAreSetCardinalities) {
  for (Shape s : {Shape::kChain, Shape::kStar, Shape::kCycle, Shape::kTree, Shape::kClique}) {
    const QueryGraph g = random_graph(s, 5, 3);
    const CostHubo c = build_precise_cost(g);
    for (const auto& [set, terms] : c.table_sets) {
      for (const auto& t : terms) {
        ASSERT_EQ(static_cast<int>(t.size()), set_size(set) - 1);
        // One variable per rank 0..|K|-2, each adding one new table.
        std::uint64_t joined = 0;
        for (int r = 0; r < static_cast<int>(t.size()); ++r) {
          ASSERT_EQ(t[r].rank(), r);
          if (r > 0) {
            ASSERT_NE(((joined >> t[r].u()) & 1U), ((joined >> t[r].v()) & 1U));
          }
          joined |= t[r].tables();
        }
        EXPECT_EQ(joined, set);
        EXPECT_TRUE(oracle::rel_eq(c.poly.coefficient(t), oracle::set_card(g, set)));
      }
    }
  }
}

TEST(HeuristicCost, ChainThreeKeepsCheapestBranch) {
  const CostHubo c = build_heuristic_cost(fixtures::chain3(), 1);
  EXPECT_EQ(c.poly.size(), 3U);
  EXPECT_NEAR(c.poly.coefficient({x(0, 1, 0)}), 100, 1e-9);
  EXPECT_NEAR(c.poly.coefficient({x(1, 2, 0)}), 60, 1e-9);
  EXPECT_NEAR(c.poly.coefficient({x(1, 2, 0), x(0, 1, 1)}), 300, 1e-9);
}

TEST(HeuristicCost, LargeNEqualsPrecise) {
  const QueryGraph g = random_graph(Shape::kClique, 5, 1);
  EXPECT_TRUE(build_heuristic_cost(g, 1000).poly == build_precise_cost(g).poly);
}

TEST(HeuristicCost, SubsetAndMonotoneInN) {
  const QueryGraph g = random_graph(Shape::kCycle, 6, 2);
  const Polynomial precise = build_precise_cost(g).poly;
  std::size_t prev = 0;
  for (int n = 1; n <= 8; ++n) {
    const Polynomial h = build_heuristic_cost(g, n).poly;
    for (const auto& [m, c] : h.terms()) EXPECT_EQ(precise.coefficient(m), c);
    EXPECT_GE(h.size(), prev);
    prev = h.size();
  }
  EXPECT_THROW(build_heuristic_cost(g, 0), Error);
}

TEST(HeuristicCost, StarWithOneFollowsGreedy) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const QueryGraph g = random_graph(Shape::kStar, 6, seed);
    const CostHubo c = build_heuristic_cost(g, 1);
    ASSERT_EQ(c.full_plans().size(), 1U);
    // Greedy by hand: cheapest edge first, then the smallest next result.
    int best_leaf = 1;
    for (int t = 2; t < g.size(); ++t)
      if (oracle::set_card(g, 1 | (1ULL << t)) < oracle::set_card(g, 1 | (1ULL << best_leaf))) best_leaf = t;
    std::vector<int> order = {0, best_leaf};
    std::uint64_t joined = 1 | (1ULL << best_leaf);
    while (static_cast<int>(order.size()) < g.size()) {
      int pick = -1;
      for (int t = 1; t < g.size(); ++t) {
        if ((joined >> t) & 1U) continue;
        if (pick < 0 || oracle::set_card(g, joined | (1ULL << t)) < oracle::set_card(g, joined | (1ULL << pick))) pick = t;
      }
      order.push_back(pick);
      joined |= 1ULL << pick;
    }
    const Monomial& plan = c.full_plans().front();
    for (std::size_t r = 0; r < plan.size(); ++r) {
      EXPECT_EQ(plan[r], x(0, order[r + 1], static_cast<int>(r))) << "seed " << seed;
    }
  }
}

TEST(DependentValidity, ChainThree) {
  const CostHubo c = build_precise_cost(fixtures::chain3());
  const StructuredPolynomial v = build_validity_dependent(c);
  const Polynomial flat = v.expand();
  Polynomial h0 = expand_squared_linear(1, {{make_monomial({x(0, 1, 0), x(1, 2, 1)}), -1},
                                            {make_monomial({x(1, 2, 0), x(0, 1, 1)}), -1}});
  Polynomial h1 = expand_squared_linear(1, {{{x(0, 1, 0)}, -1}, {{x(1, 2, 0)}, -1}});
  h1 += expand_squared_linear(1, {{{x(0, 1, 1)}, -1}, {{x(1, 2, 1)}, -1}});
  EXPECT_TRUE(flat == add(h0, h1));

  Assignment a = {{x(0, 1, 0), false}, {x(1, 2, 0), true}, {x(0, 1, 1), true}, {x(1, 2, 1), false}};
  EXPECT_EQ(v.evaluate(a), 0.0);
  for (auto& [k, bit] : a) bit = false;
  EXPECT_EQ(v.evaluate(a), 3.0);
}

TEST(IndependentValidity, ChainThreeConstraints) {
  const auto [v, sem] = build_validity_independent(fixtures::chain3());
  EXPECT_EQ(sem, Semantics::kCumulative);
  Assignment a = {{x(0, 1, 0), false}, {x(1, 2, 0), true}, {x(0, 1, 1), true}, {x(1, 2, 1), true}};
  EXPECT_EQ(v.evaluate(a), 0.0);
  // Dropping a join that was performed earlier is penalized.
  a[x(1, 2, 1)] = false;
  EXPECT_GE(v.evaluate(a), 1.0);
}

TEST(IndependentValidity, CliqueThreePenalties) {
  const QueryGraph g = random_graph(Shape::kClique, 3, 0);
  const auto [v, sem] = build_validity_independent(g);
  EXPECT_EQ(sem, Semantics::kOnePerRank);
  const Polynomial& plain = v.plain();
  EXPECT_EQ(plain.coefficient({x(0, 1, 0), x(0, 1, 1)}), 1.0);
  EXPECT_EQ(plain.coefficient({x(0, 2, 0), x(0, 2, 1)}), 1.0);
  // Joins sharing one table are not penalized; no clique-3 pair is disjoint.
  EXPECT_EQ(plain.coefficient({x(0, 1, 0), x(1, 2, 1)}), 0.0);
}

TEST(IndependentValidity, ShapeTagMustMatch) {
  const QueryGraph not_a_star(Shape::kStar, {1, 1, 1, 1}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  try {
    build_validity_independent(not_a_star);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
  const QueryGraph custom_cycle(Shape::kCustom, {1, 1, 1, 1}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}});
  EXPECT_EQ(build_validity_independent(custom_cycle).second, Semantics::kCumulative);
}

TEST(TreePairCount, FailsOnTreeWithDegreeThreeNode) {
  // 0-2, 1-2, 2-3, 3-4: the last rank always holds four adjacent pairs.
  const QueryGraph g(Shape::kTree, {1, 1, 1, 1, 1}, {{0, 2, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  const Polynomial quartic = tree_pair_count_constraint(g);
  const Problem p = build_problem(g, Method::kPrecise2);
  for (const auto& o : adherent_orders(g)) {
    const Assignment a = encode(o, p);
    EXPECT_GE(quartic.evaluate(a), 1.0);
    EXPECT_EQ(p.validity.evaluate(a), 0.0);
  }
}

TEST(Assemble, ChainThreeNormalization) {
  const Problem p = build_problem(fixtures::chain3(), Method::kPrecise1);
  EXPECT_EQ(p.cost_scale, 300.0);
  EXPECT_NEAR(p.cost.coefficient({x(0, 1, 0)}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.cost.coefficient({x(1, 2, 0)}), 1.0 / 5.0, 1e-15);
  EXPECT_NEAR(p.penalty_C, 38.0 / 15.0, 1e-12);
  const Assignment a = encode({1, 2, 0}, p);
  EXPECT_NEAR(p.full().evaluate(a) * p.cost_scale, 360.0, 1e-9);
}

TEST(Assemble, SingleEdgePenaltyIsOne) {
  EXPECT_EQ(build_problem(fixtures::single_edge(), Method::kPrecise1).penalty_C, 1.0);
}

TEST(Decode, ChainThree) {
  const Problem p = build_problem(fixtures::chain3(), Method::kPrecise1);
  Assignment a = zeros(p);
  a[x(1, 2, 0)] = true;
  a[x(0, 1, 1)] = true;
  const JoinTree t = decode(a, p);
  EXPECT_EQ(t.leaves(), (std::vector<RelationId>{1, 2, 0}));
  EXPECT_NEAR(cost(t, p.graph), 360, 1e-9);

  a[x(0, 1, 0)] = true;
  EXPECT_THROW(decode(a, p, DecodeMode::kStrict), Error);
  EXPECT_EQ(decode(a, p, DecodeMode::kLenient).leaves(), (std::vector<RelationId>{1, 2, 0}));

  try {
    decode(zeros(p), p, DecodeMode::kLenient);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
  }
}

TEST(Decode, MissingVariable) {
  const Problem p = build_problem(fixtures::chain3(), Method::kPrecise1);
  try {
    decode({{x(1, 2, 0), true}}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingVariable);
  }
}

TEST(EncodeDecode, RoundTripEveryOrder) {
  for (Shape s : {Shape::kChain, Shape::kStar, Shape::kCycle, Shape::kTree, Shape::kClique}) {
    const QueryGraph g = random_graph(s, 5, 7);
    for (Method m : {Method::kPrecise1, Method::kPrecise2, Method::kHeuristic}) {
      const Problem p = build_problem(g, m, 2);
      for (const auto& o : adherent_orders(g)) {
        const Assignment a = encode(o, p);
        EXPECT_TRUE(is_plan_encoding(a, p));
        EXPECT_EQ(decode_order(a, p, DecodeMode::kStrict), o);
        EXPECT_EQ(decode_order(a, p, DecodeMode::kLenient), o);
        if (m == Method::kPrecise2) {
          EXPECT_EQ(p.validity.evaluate(a), 0.0);
        }
      }
    }
  }
}

TEST(VariableCount, Examples) {
  EXPECT_EQ(variable_count(generate_shape(Shape::kClique, 4, 0), Method::kPrecise1), 18);
  EXPECT_EQ(variable_count(generate_shape(Shape::kChain, 3, 0), Method::kPrecise1), 4);
  EXPECT_EQ(variable_count(generate_shape(Shape::kCycle, 5, 0), Method::kPrecise1), 20);
  EXPECT_EQ(variable_count(generate_shape(Shape::kClique, 5, 0), Method::kPrecise2), 4 * 10 + 5 * 3);
  const Problem p = build_problem(random_graph(Shape::kClique, 5, 0), Method::kPrecise2);
  EXPECT_EQ(static_cast<long long>(p.variables().size()), variable_count(p.graph, Method::kPrecise2));
}

TEST(AdherentOrders, Counts) {
  EXPECT_EQ(adherent_orders(generate_shape(Shape::kClique, 3, 0)).size(), 3U);
  EXPECT_EQ(adherent_orders(generate_shape(Shape::kStar, 4, 0)).size(), 6U);
  EXPECT_EQ(adherent_orders(generate_shape(Shape::kChain, 4, 0)).size(), 4U);
}

TEST(Sidecar, RebuildsProblem) {
  const QueryGraph g = random_graph(Shape::kCycle, 5, 9);
  const Problem p = build_problem(g, Method::kHeuristic, 2);
  const Problem q = problem_from_sidecar(nlohmann::json::parse(problem_sidecar(p).dump()));
  EXPECT_TRUE(q.cost == p.cost);
  EXPECT_EQ(q.penalty_C, p.penalty_C);
  EXPECT_EQ(q.heuristic_n, 2);
  EXPECT_TRUE(q.validity.expand() == p.validity.expand());
}

}  // namespace
}  // namespace hubojoin
