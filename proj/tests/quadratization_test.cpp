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

#include "hubojoin/quadratization.hpp"

#include <gtest/gtest.h>

#include "hubojoin/random.hpp"
#include "oracles.hpp"

namespace hubojoin {
namespace {

VariableId v(int i) { return VariableId::join(0, 1, i); }

Polynomial random_hubo(Rng& rng, int nvars, int nterms) {
  Polynomial p;
  for (int t = 0; t < nterms; ++t) {
    const int degree = 1 + static_cast<int>(rng.below(4));
    std::vector<VariableId> m;
    for (int k = 0; k < degree; ++k) m.push_back(v(static_cast<int>(rng.below(nvars))));
    p.add_term(m, std::round((rng.uniform01() * 20 - 10) * 4) / 4);
  }
  return p;
}

TEST(Reduce, MinSelectionNegativeCubic) {
  Polynomial p;
  p.add_term({v(0), v(1), v(2)}, -1);
  const Reduction r = reduce(p, ReductionMethod::kMinSelection);
  const VariableId w = VariableId::aux(0);
  EXPECT_EQ(r.qubo.size(), 4U);
  EXPECT_EQ(r.qubo.coefficient({v(0), w}), -1.0);
  EXPECT_EQ(r.qubo.coefficient({v(1), w}), -1.0);
  EXPECT_EQ(r.qubo.coefficient({v(2), w}), -1.0);
  EXPECT_EQ(r.qubo.coefficient({w}), 2.0);
  EXPECT_EQ(oracle::brute_min(r.qubo), -1.0);
}

TEST(Reduce, SubstitutionPositiveCubic) {
  Polynomial p;
  p.add_term({v(0), v(1), v(2)}, 1);
  const Reduction r = reduce(p, ReductionMethod::kSubstitution);
  const VariableId w = VariableId::aux(0);
  EXPECT_EQ(r.qubo.size(), 5U);
  EXPECT_EQ(r.qubo.coefficient({w, v(2)}), 1.0);
  EXPECT_EQ(r.qubo.coefficient({v(0), v(1)}), 2.0);
  EXPECT_EQ(r.qubo.coefficient({v(0), w}), -4.0);
  EXPECT_EQ(r.qubo.coefficient({v(1), w}), -4.0);
  EXPECT_EQ(r.qubo.coefficient({w}), 6.0);
  ASSERT_EQ(r.map.introduced.size(), 1U);
  EXPECT_EQ(r.map.introduced[0].penalty_weight, 2.0);
  EXPECT_EQ(oracle::brute_min(r.qubo), 0.0);
}

TEST(Reduce, QuadraticIsIdentity) {
  Polynomial p(3);
  p.add_term({v(0), v(1)}, -2).add_term({v(2)}, 1);
  for (auto m : {ReductionMethod::kMinSelection, ReductionMethod::kSubstitution, ReductionMethod::kMixed}) {
    const Reduction r = reduce(p, m);
    EXPECT_TRUE(r.qubo == p);
    EXPECT_TRUE(r.map.introduced.empty());
  }
}

TEST(Reduce, PreservesMinimaOnRandomHubos) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const Polynomial p = random_hubo(rng, 3 + static_cast<int>(rng.below(6)), 6);
    const double want = oracle::brute_min(p);
    for (auto m : {ReductionMethod::kMinSelection, ReductionMethod::kSubstitution, ReductionMethod::kMixed}) {
      const Reduction r = reduce(p, m);
      ASSERT_TRUE(r.qubo.is_quadratic());
      if (r.qubo.vars().size() > 22) continue;
      EXPECT_TRUE(oracle::rel_eq(oracle::brute_min(r.qubo), want)) << to_string(m) << " trial " << trial;
    }
  }
}

TEST(Reduce, DeterministicAndFreshAux) {
  Rng rng(8);
  const Polynomial p = random_hubo(rng, 8, 10);
  const Reduction a = reduce(p), b = reduce(p);
  EXPECT_TRUE(a.qubo == b.qubo);
  for (const auto& d : a.map.introduced) EXPECT_EQ(p.vars().count(d.aux), 0U);
}

TEST(Lift, ProjectsAndFlags) {
  Polynomial p;
  p.add_term({v(0), v(1), v(2)}, 1);
  const Reduction r = reduce(p, ReductionMethod::kSubstitution);
  const VariableId w = VariableId::aux(0);
  Assignment x = {{v(0), false}, {v(1), true}, {v(2), true}, {w, false}};
  Lifted l = lift(x, r.map);
  EXPECT_FALSE(l.aux_inconsistent);
  EXPECT_EQ(l.assignment.size(), 3U);
  x[w] = true;
  l = lift(x, r.map);
  EXPECT_TRUE(l.aux_inconsistent);
  EXPECT_EQ(l.assignment.count(w), 0U);
  // Only variables the map introduced are projected away.
  EXPECT_EQ(lift(x, ReductionMap{}).assignment.size(), 4U);
}

TEST(Lift, OptimalReducedLiftsToSourceOptimum) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = random_hubo(rng, 6, 6);
    const Reduction r = reduce(p);
    const auto vs = r.qubo.vars();
    const std::vector<VariableId> vars(vs.begin(), vs.end());
    if (vars.size() > 20) continue;
    double best = 1e300;
    std::uint64_t arg = 0;
    for (std::uint64_t b = 0; b < (1ULL << vars.size()); ++b) {
      const double e = oracle::eval_bits(r.qubo, vars, b);
      if (e < best) best = e, arg = b;
    }
    Assignment src = lift(oracle::bits_to_assignment(vars, arg), r.map).assignment;
    for (const auto& s : p.vars()) src.emplace(s, false);
    EXPECT_TRUE(oracle::rel_eq(p.evaluate(src), best));
  }
}

TEST(QuboText, Format) {
  Polynomial p(1.5);
  p.add_term({v(0)}, 2).add_term({v(0), v(1)}, -1);
  EXPECT_EQ(to_qubo_text(p),
            "# vars 2\n# offset 1.5\n0 0 2\n0 1 -1\n# 0 x0_1^0\n# 1 x0_1^1\n");
  Polynomial cubic;
  cubic.add_term({v(0), v(1), v(2)}, 1);
  EXPECT_THROW(to_qubo_text(cubic), Error);
}

}  // namespace
}  // namespace hubojoin
