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

#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hubojoin/error.hpp"
#include "hubojoin/join_tree.hpp"
#include "hubojoin/polynomial.hpp"
#include "hubojoin/query_graph.hpp"

namespace hubojoin {

enum class Method { kPrecise1, kPrecise2, kHeuristic };

/// How a plan is written into join variables.
///   kOnePerRank  exactly the rank-r join is set at rank r
///   kCumulative  every join performed at rank <= r is set at rank r
enum class Semantics { kOnePerRank, kCumulative };

enum class DecodeMode { kStrict, kLenient };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::kPrecise1: return "precise1";
    case Method::kPrecise2: return "precise2";
    case Method::kHeuristic: return "heuristic";
  }
  return "";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::kPrecise1, Method::kPrecise2, Method::kHeuristic}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + std::string(s) + "'");
}

inline std::string_view to_string(Semantics s) {
  return s == Semantics::kOnePerRank ? "one-per-rank" : "cumulative";
}

inline Semantics parse_semantics(std::string_view s) {
  if (s == "one-per-rank") return Semantics::kOnePerRank;
  if (s == "cumulative") return Semantics::kCumulative;
  throw Error(ErrorKind::kInvalidArgument, "unknown semantics '" + std::string(s) + "'");
}

/// Number of ranks (joins) of a left-deep plan over `g`.
inline int rank_count(const QueryGraph& g) { return g.size() - 1; }

/// Lexicographic order on the sorted member lists of two relation sets.
inline bool set_lex_less(RelationSet a, RelationSet b) {
  while (a != 0 && b != 0) {
    const int x = std::countr_zero(a);
    const int y = std::countr_zero(b);
    if (x != y) return x < y;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

/// Cost HUBO plus the table-set dictionary it was grown from: every key is a
/// connected relation set, mapped to the join-variable chains that build it.
struct CostHubo {
  QueryGraph graph;
  Polynomial poly;
  std::map<RelationSet, std::vector<Monomial>> table_sets;
  std::optional<int> heuristic_n;

  const std::vector<Monomial>& full_plans() const {
    static const std::vector<Monomial> none;
    auto it = table_sets.find(graph.all());
    return it == table_sets.end() ? none : it->second;
  }
};

namespace detail {

inline CostHubo build_cost(const QueryGraph& g, std::optional<int> keep) {
  if (g.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two relations");
  CostHubo out{g, {}, {}, keep};
  std::map<RelationSet, std::vector<Monomial>> level;
  for (const auto& e : g.edges()) {
    level[singleton(e.u) | singleton(e.v)].push_back({VariableId::join(e.u, e.v, 0)});
  }
  auto commit = [&](const std::map<RelationSet, std::vector<Monomial>>& lv) {
    for (const auto& [set, terms] : lv) {
      const double alpha = g.set_cardinality(set);
      for (const auto& t : terms) out.poly.add_canonical(t, alpha);
      out.table_sets.emplace(set, terms);
    }
  };
  commit(level);
  for (int r = 1; r < rank_count(g); ++r) {
    std::vector<RelationSet> grow;
    grow.reserve(level.size());
    for (const auto& [set, terms] : level) grow.push_back(set);
    if (keep && static_cast<int>(grow.size()) > *keep) {
      std::vector<std::pair<double, RelationSet>> ranked;
      for (RelationSet s : grow) ranked.emplace_back(g.set_cardinality(s), s);
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return set_lex_less(a.second, b.second);
      });
      grow.clear();
      for (int i = 0; i < *keep; ++i) grow.push_back(ranked[i].second);
    }
    std::map<RelationSet, std::vector<Monomial>> next;
    for (RelationSet joined : grow) {
      const auto& old_terms = level.at(joined);
      for (const auto& e : g.edges()) {
        if (contains(joined, e.u) == contains(joined, e.v)) continue;
        const VariableId x = VariableId::join(e.u, e.v, r);
        auto& bucket = next[joined | singleton(e.u) | singleton(e.v)];
        for (const auto& t : old_terms) {
          Monomial m = t;
          m.push_back(x);  // rank r sorts after every rank < r
          bucket.push_back(std::move(m));
        }
      }
    }
    commit(next);
    level = std::move(next);
  }
  return out;
}

}  // namespace detail

/// Cost HUBO whose terms enumerate every cross-product-free left-deep prefix.
/// A term over relation set K has coefficient |K| (product of cardinalities
/// and internal selectivities), so a plan's active terms sum to its cost.
inline CostHubo build_precise_cost(const QueryGraph& g) { return detail::build_cost(g, std::nullopt); }

/// Like build_precise_cost, but at each rank only the `n` relation sets with
/// the smallest coefficient (ties: lexicographically smallest set) grow.
inline CostHubo build_heuristic_cost(const QueryGraph& g, int n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "heuristic n must be >= 1");
  return detail::build_cost(g, n);
}

/// sum_r (1 - sum_e x_e^r)^2 : exactly one join per rank.
inline StructuredPolynomial one_join_per_rank(const QueryGraph& g) {
  StructuredPolynomial out;
  for (int r = 0; r < rank_count(g); ++r) {
    SquaredBlock b{1.0, 1.0, {}};
    for (const auto& e : g.edges()) b.terms.push_back({{VariableId::join(e.u, e.v, r)}, -1.0});
    out.add_block(std::move(b));
  }
  return out;
}

/// (1 - sum_{h in full plans} h)^2 + one join per rank.
inline StructuredPolynomial build_validity_dependent(const CostHubo& c) {
  const auto& plans = c.full_plans();
  if (plans.empty()) {
    throw Error(ErrorKind::kEmpty, "cost HUBO has no term covering all relations");
  }
  SquaredBlock h0{1.0, 1.0, {}};
  h0.terms.reserve(plans.size());
  for (const auto& h : plans) h0.terms.push_back({h, -1.0});
  StructuredPolynomial out;
  out.add_block(std::move(h0));
  out += one_join_per_rank(c.graph);
  return out;
}

/// Which family of cost-independent constraints a graph gets.
enum class ConstraintFamily { kClique, kPath, kStar, kAttach };

namespace detail {

inline int max_degree(const QueryGraph& g) {
  int d = 0;
  for (int i = 0; i < g.size(); ++i) d = std::max(d, set_size(g.neighbors(i)));
  return d;
}

inline bool is_path(const QueryGraph& g) { return g.is_acyclic() && max_degree(g) <= 2; }
inline bool is_star(const QueryGraph& g) {
  return g.is_acyclic() && max_degree(g) == g.size() - 1;
}
inline bool is_cycle(const QueryGraph& g) {
  if (g.edge_count() != g.size() || g.size() < 3) return false;
  for (int i = 0; i < g.size(); ++i)
    if (set_size(g.neighbors(i)) != 2) return false;
  return true;
}

}  // namespace detail

inline ConstraintFamily constraint_family(const QueryGraph& g) {
  auto mismatch = [&] {
    return Error(ErrorKind::kShape, "graph topology does not match its '" +
                                        std::string(to_string(g.shape())) + "' tag");
  };
  switch (g.shape()) {
    case Shape::kClique:
      if (!g.is_complete()) throw mismatch();
      return ConstraintFamily::kClique;
    case Shape::kChain:
      if (!detail::is_path(g)) throw mismatch();
      return ConstraintFamily::kPath;
    case Shape::kCycle:
      if (!detail::is_cycle(g)) throw mismatch();
      return ConstraintFamily::kPath;
    case Shape::kStar:
      if (!detail::is_star(g)) throw mismatch();
      return ConstraintFamily::kStar;
    case Shape::kTree:
      if (!g.is_acyclic()) throw mismatch();
      return ConstraintFamily::kAttach;
    case Shape::kCustom:
      return g.is_complete() ? ConstraintFamily::kClique : ConstraintFamily::kAttach;
  }
  throw mismatch();
}

inline Semantics independent_semantics(const QueryGraph& g) {
  return constraint_family(g) == ConstraintFamily::kClique ? Semantics::kOnePerRank
                                                           : Semantics::kCumulative;
}

namespace detail {

inline bool share_one(const JoinEdge& a, const JoinEdge& b) {
  const RelationSet x = singleton(a.u) | singleton(a.v);
  const RelationSet y = singleton(b.u) | singleton(b.v);
  return set_size(x & y) == 1;
}

inline VariableId var(const JoinEdge& e, int r) { return VariableId::join(e.u, e.v, r); }

// sum_r weight * (r + 1 - sum_e x_e^r)^2
inline void add_cumulative_counts(const QueryGraph& g, double weight, StructuredPolynomial& out) {
  for (int r = 0; r < rank_count(g); ++r) {
    SquaredBlock b{weight, static_cast<double>(r + 1), {}};
    for (const auto& e : g.edges()) b.terms.push_back({{var(e, r)}, -1.0});
    out.add_block(std::move(b));
  }
}

// sum_e sum_{r>=1} x_e^{r-1} (1 - x_e^r)
inline void add_carry_forward(const QueryGraph& g, Polynomial& out) {
  for (const auto& e : g.edges()) {
    for (int r = 1; r < rank_count(g); ++r) {
      out.add_term({var(e, r - 1)}, 1.0);
      out.add_term({var(e, r - 1), var(e, r)}, -1.0);
    }
  }
}

// prod_{e' incident to t, e' != skip} (1 - x_{e'}^r): relation t uncovered at r.
inline Polynomial uncovered(const QueryGraph& g, RelationId t, int skip, int r) {
  Polynomial p(1.0);
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const auto& e = g.edges()[k];
    if (static_cast<int>(k) == skip || (e.u != t && e.v != t)) continue;
    Polynomial factor(1.0);
    factor.add_term({var(e, r)}, -1.0);
    p = multiply(p, factor);
  }
  return p;
}

}  // namespace detail

/// Cost-independent validity for `g`, together with the variable semantics it
/// expects. Integer-valued, zero exactly on encodings of valid plans and at
/// least 1 elsewhere.
///
///   clique   one join per rank; +1 for consecutive-rank joins that are equal
///            or disjoint; per table (c_i - 1 - sum_k y^i_k)^2 with c_i the
///            table's join count over all ranks and |V|-2 unit slacks.
///   path     chain/cycle: 3 * (r + 1 - sum_e x_e^r)^2, carry-forward, and -1
///            per same-rank pair of joins sharing one table, offset by the
///            r pairs a connected path has.
///   star     as path with weight |V| and offset C(r + 1, 2).
///   attach   trees/custom: counts and carry-forward, plus a penalty whenever
///            a join first set at rank r does not have exactly one endpoint
///            covered at rank r - 1.
inline std::pair<StructuredPolynomial, Semantics> build_validity_independent(const QueryGraph& g) {
  if (g.size() < 2) throw Error(ErrorKind::kShape, "need at least two relations");
  using detail::var;
  const int ranks = rank_count(g);
  const auto& edges = g.edges();
  StructuredPolynomial out;
  const ConstraintFamily family = constraint_family(g);
  switch (family) {
    case ConstraintFamily::kClique: {
      out += one_join_per_rank(g);
      for (int r = 0; r + 1 < ranks; ++r) {
        for (const auto& e : edges) {
          for (const auto& f : edges) {
            if (!detail::share_one(e, f)) out.plain().add_term({var(e, r), var(f, r + 1)}, 1.0);
          }
        }
      }
      for (RelationId t = 0; t < g.size(); ++t) {
        SquaredBlock b{1.0, -1.0, {}};
        for (int r = 0; r < ranks; ++r)
          for (const auto& e : edges)
            if (e.u == t || e.v == t) b.terms.push_back({{var(e, r)}, 1.0});
        for (int k = 1; k <= g.size() - 2; ++k) {
          b.terms.push_back({{VariableId::count_slack(t, k)}, -1.0});
        }
        out.add_block(std::move(b));
      }
      return {std::move(out), Semantics::kOnePerRank};
    }
    case ConstraintFamily::kPath:
    case ConstraintFamily::kStar: {
      const bool star = family == ConstraintFamily::kStar;
      detail::add_cumulative_counts(g, star ? g.size() : 3.0, out);
      detail::add_carry_forward(g, out.plain());
      double offset = 0.0;
      for (int r = 0; r < ranks; ++r) {
        offset += star ? r * (r + 1) / 2.0 : r;
        for (std::size_t a = 0; a < edges.size(); ++a)
          for (std::size_t b = a + 1; b < edges.size(); ++b)
            if (detail::share_one(edges[a], edges[b]))
              out.plain().add_term({var(edges[a], r), var(edges[b], r)}, -1.0);
      }
      out.plain().add_constant(offset);
      return {std::move(out), Semantics::kCumulative};
    }
    case ConstraintFamily::kAttach: {
      detail::add_cumulative_counts(g, 1.0, out);
      detail::add_carry_forward(g, out.plain());
      for (int r = 1; r < ranks; ++r) {
        for (std::size_t k = 0; k < edges.size(); ++k) {
          const auto& e = edges[k];
          Polynomial fresh;
          fresh.add_term({var(e, r)}, 1.0);
          fresh.add_term({var(e, r), var(e, r - 1)}, -1.0);
          const Polynomial pu = detail::uncovered(g, e.u, static_cast<int>(k), r - 1);
          const Polynomial pv = detail::uncovered(g, e.v, static_cast<int>(k), r - 1);
          // [covered(u) == covered(v)] = 1 - P_u - P_v + 2 P_u P_v
          Polynomial same(1.0);
          same += scale(pu, -1.0);
          same += scale(pv, -1.0);
          same += scale(multiply(pu, pv), 2.0);
          out.plain() += multiply(fresh, same);
        }
      }
      return {std::move(out), Semantics::kCumulative};
    }
  }
  throw Error(ErrorKind::kShape, "undeterminable shape");
}

/// Literal same-rank pair-count constraint sum_r (r - #adjacent pairs at r)^2.
/// Kept for comparison only: it is not zero on all valid plans of trees with
/// a degree-3 node, which is why trees use the attach constraint instead.
inline Polynomial tree_pair_count_constraint(const QueryGraph& g) {
  Polynomial out;
  const auto& edges = g.edges();
  for (int r = 0; r < rank_count(g); ++r) {
    LinearTerms pairs;
    for (std::size_t a = 0; a < edges.size(); ++a)
      for (std::size_t b = a + 1; b < edges.size(); ++b)
        if (detail::share_one(edges[a], edges[b]))
          pairs.push_back({make_monomial({detail::var(edges[a], r), detail::var(edges[b], r)}), -1.0});
    out += expand_squared_linear(static_cast<double>(r), pairs);
  }
  return out;
}

/// Assembled HUBO: cost (normalized to max coefficient 1) + penalty_C * validity.
struct Problem {
  QueryGraph graph;
  Method method = Method::kPrecise1;
  Semantics semantics = Semantics::kOnePerRank;
  /// Valid encodings must have consecutive-rank joins sharing a table; set
  /// together with the table-count slack variables.
  bool linked_ranks = false;
  Polynomial cost;
  StructuredPolynomial validity;
  double penalty_C = 1.0;
  double cost_scale = 1.0;
  int heuristic_n = 0;
  /// Relation sets the cost HUBO can express, when validity depends on it.
  std::optional<std::set<RelationSet>> plan_sets = std::nullopt;

  StructuredPolynomial full() const {
    StructuredPolynomial out(cost);
    out += scale(validity, penalty_C);
    return out;
  }

  /// Every join variable plus any slack variables, in canonical order.
  std::vector<VariableId> variables() const {
    std::vector<VariableId> vs;
    for (int r = 0; r < rank_count(graph); ++r)
      for (const auto& e : graph.edges()) vs.push_back(VariableId::join(e.u, e.v, r));
    if (linked_ranks) {
      for (RelationId t = 0; t < graph.size(); ++t)
        for (int k = 1; k <= graph.size() - 2; ++k) vs.push_back(VariableId::count_slack(t, k));
    }
    std::sort(vs.begin(), vs.end());
    return vs;
  }
};

inline Problem assemble(const CostHubo& cost, StructuredPolynomial validity, Semantics semantics,
                        Method method) {
  if (cost.poly.size() == 0) throw Error(ErrorKind::kEmpty, "empty cost HUBO");
  Normalized n = normalize(cost.poly);
  Problem p{.graph = cost.graph,
            .method = method,
            .semantics = semantics,
            .cost = std::move(n.poly),
            .validity = std::move(validity),
            .plan_sets = std::nullopt};
  p.cost_scale = n.factor;
  p.penalty_C = p.cost.sum_coefficients();
  if (method != Method::kPrecise2) {
    std::set<RelationSet> sets;
    for (const auto& [s, terms] : cost.table_sets) sets.insert(s);
    p.plan_sets = std::move(sets);
  }
  if (method == Method::kPrecise2 && constraint_family(cost.graph) == ConstraintFamily::kClique) {
    p.linked_ranks = true;
  }
  if (cost.heuristic_n) p.heuristic_n = *cost.heuristic_n;
  return p;
}

/// Builds one of the three formulations end to end.
inline Problem build_problem(const QueryGraph& g, Method method, int heuristic_n = 1) {
  switch (method) {
    case Method::kPrecise1: {
      CostHubo c = build_precise_cost(g);
      StructuredPolynomial v = build_validity_dependent(c);
      return assemble(c, std::move(v), Semantics::kOnePerRank, method);
    }
    case Method::kHeuristic: {
      CostHubo c = build_heuristic_cost(g, heuristic_n);
      StructuredPolynomial v = build_validity_dependent(c);
      return assemble(c, std::move(v), Semantics::kOnePerRank, method);
    }
    case Method::kPrecise2: {
      CostHubo c = build_precise_cost(g);
      auto [v, sem] = build_validity_independent(g);
      return assemble(c, std::move(v), sem, method);
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method");
}

/// Join variables (|V|-1)|E|, plus |V|(|V|-2) count slacks for precise-2 on
/// cliques.
inline long long variable_count(const QueryGraph& g, Method method) {
  long long n = static_cast<long long>(rank_count(g)) * g.edge_count();
  if (method == Method::kPrecise2 && constraint_family(g) == ConstraintFamily::kClique) {
    n += static_cast<long long>(g.size()) * (g.size() - 2);
  }
  return n;
}

/// Join edge used at each rank when `order` is written as a plan: the edge to
/// the previous relation when present, else the smallest edge into the prefix.
inline std::vector<JoinEdge> plan_edges(std::span<const RelationId> order, const QueryGraph& g) {
  if (static_cast<int>(order.size()) != g.size()) {
    throw Error(ErrorKind::kInvalidArgument, "order must list every relation once");
  }
  std::vector<JoinEdge> out;
  RelationSet prefix = singleton(order[0]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const RelationId t = order[i];
    if (contains(prefix, t)) throw Error(ErrorKind::kDuplicate, "duplicate relation in order");
    int k = g.has_edge(order[i - 1], t) ? g.edge_index(order[i - 1], t) : -1;
    if (k < 0) {
      const RelationSet link = g.neighbors(t) & prefix;
      if (link == 0) throw Error(ErrorKind::kInfeasible, "order needs a cross product");
      k = g.edge_index(std::countr_zero(link), t);
    }
    out.push_back(g.edges()[k]);
    prefix |= singleton(t);
  }
  return out;
}

/// Assignment over all problem variables that writes `order` per the
/// problem's semantics (slacks of the table-count constraint included).
inline Assignment encode(std::span<const RelationId> order, const Problem& p) {
  Assignment x;
  for (const auto& v : p.variables()) x[v] = false;
  const auto edges = plan_edges(order, p.graph);
  for (int r = 0; r < static_cast<int>(edges.size()); ++r) {
    if (p.semantics == Semantics::kOnePerRank) {
      x[detail::var(edges[r], r)] = true;
    } else {
      for (int k = 0; k <= r; ++k) x[detail::var(edges[k], r)] = true;
    }
  }
  std::vector<int> appearances(p.graph.size(), 0);
  for (const auto& e : edges) {
    ++appearances[e.u];
    ++appearances[e.v];
  }
  for (auto& [v, bit] : x) {
    if (v.kind() == VarKind::kCountSlack) bit = v.k() <= appearances[v.table()] - 1;
  }
  return x;
}

inline Assignment encode(std::initializer_list<RelationId> order, const Problem& p) {
  return encode(std::span<const RelationId>(order.begin(), order.size()), p);
}

namespace detail {

struct RankJoins {
  std::vector<std::vector<JoinEdge>> active;  // per rank, canonical order
};

inline RankJoins active_joins(const Assignment& x, const Problem& p) {
  RankJoins out;
  out.active.resize(rank_count(p.graph));
  for (int r = 0; r < rank_count(p.graph); ++r) {
    for (const auto& e : p.graph.edges()) {
      auto it = x.find(VariableId::join(e.u, e.v, r));
      if (it == x.end()) {
        throw Error(ErrorKind::kMissingVariable, "assignment lacks " + var(e, r).name());
      }
      if (it->second) out.active[r].push_back(e);
    }
  }
  return out;
}

inline bool connects(const JoinEdge& e, RelationSet joined) {
  return contains(joined, e.u) != contains(joined, e.v);
}

inline RelationId new_table(const JoinEdge& e, RelationSet joined) {
  return contains(joined, e.u) ? e.v : e.u;
}

inline bool same_edge(const JoinEdge& a, const JoinEdge& b) { return a.u == b.u && a.v == b.v; }

// Depth-first repair: pick, rank by rank, a candidate join that adds exactly
// one relation; first success in canonical order wins.
inline bool lenient_search(const std::vector<std::vector<JoinEdge>>& cands, int r,
                           RelationSet joined, std::vector<RelationId>& order,
                           std::vector<JoinEdge>& used) {
  if (r == static_cast<int>(cands.size())) return true;
  for (const auto& e : cands[r]) {
    if (std::any_of(used.begin(), used.end(), [&](const JoinEdge& u) { return same_edge(u, e); }))
      continue;
    if (r == 0) {
      order = {e.u, e.v};
    } else if (!connects(e, joined)) {
      continue;
    } else {
      order.push_back(new_table(e, joined));
    }
    used.push_back(e);
    if (lenient_search(cands, r + 1, joined | singleton(e.u) | singleton(e.v), order, used))
      return true;
    used.pop_back();
    if (r == 0) order.clear(); else order.pop_back();
  }
  return false;
}

}  // namespace detail

/// Join order written in `x`. Strict mode rejects anything that is not an
/// exact encoding under the problem's semantics; lenient mode ignores spurious
/// activations and searches for a consistent chain among the active joins.
inline std::vector<RelationId> decode_order(const Assignment& x, const Problem& p,
                                            DecodeMode mode = DecodeMode::kStrict) {
  using detail::connects;
  const auto joins = detail::active_joins(x, p);
  const int ranks = rank_count(p.graph);
  auto infeasible = [](const std::string& why) { return Error(ErrorKind::kInfeasible, why); };
  std::vector<RelationId> order;
  if (mode == DecodeMode::kStrict) {
    RelationSet joined = 0;
    std::vector<JoinEdge> prev;
    for (int r = 0; r < ranks; ++r) {
      const auto& act = joins.active[r];
      JoinEdge added;
      if (p.semantics == Semantics::kOnePerRank) {
        if (act.size() != 1) {
          throw infeasible("rank " + std::to_string(r) + " has " + std::to_string(act.size()) +
                           " active joins");
        }
        added = act[0];
        if (p.linked_ranks && r > 0 && !detail::share_one(prev[0], added)) {
          throw infeasible("consecutive joins do not share a table at rank " + std::to_string(r));
        }
      } else {
        if (static_cast<int>(act.size()) != r + 1) {
          throw infeasible("rank " + std::to_string(r) + " must hold " + std::to_string(r + 1) +
                           " joins");
        }
        int fresh = 0;
        for (const auto& e : act) {
          const bool before = std::any_of(prev.begin(), prev.end(),
                                          [&](const JoinEdge& q) { return detail::same_edge(q, e); });
          if (!before) {
            added = e;
            ++fresh;
          }
        }
        if (fresh != 1) throw infeasible("rank " + std::to_string(r) + " does not extend rank r-1");
      }
      if (r == 0) {
        order = {added.u, added.v};
      } else {
        if (!connects(added, joined)) {
          throw infeasible("join at rank " + std::to_string(r) + " does not add exactly one relation");
        }
        order.push_back(detail::new_table(added, joined));
      }
      joined |= singleton(added.u) | singleton(added.v);
      prev = act;
    }
  } else {
    std::vector<std::vector<JoinEdge>> cands(ranks);
    if (p.semantics == Semantics::kOnePerRank) {
      cands = joins.active;
    } else {
      // Joins first switched on at rank r go first, then older activations.
      for (int r = 0; r < ranks; ++r) {
        std::vector<JoinEdge> fresh, stale;
        for (const auto& e : joins.active[r]) {
          bool seen = false;
          for (int q = 0; q < r && !seen; ++q)
            for (const auto& f : joins.active[q]) seen = seen || detail::same_edge(e, f);
          (seen ? stale : fresh).push_back(e);
        }
        cands[r] = fresh;
        cands[r].insert(cands[r].end(), stale.begin(), stale.end());
      }
    }
    std::vector<JoinEdge> used;
    if (!detail::lenient_search(cands, 0, 0, order, used)) {
      throw infeasible("no consistent chain of active joins");
    }
  }
  return order;
}

inline JoinTree decode(const Assignment& x, const Problem& p, DecodeMode mode = DecodeMode::kStrict) {
  const auto order = decode_order(x, p, mode);
  JoinTree t = leftdeep_from_order(order);
  if (!adheres(t, p.graph)) throw Error(ErrorKind::kInfeasible, "decoded tree does not adhere");
  return t;
}

/// True iff `x` is an exact encoding of a valid plan: strict decode succeeds
/// and every table-count slack matches its table's join count.
inline bool is_plan_encoding(const Assignment& x, const Problem& p) {
  std::vector<RelationId> order;
  try {
    order = decode_order(x, p, DecodeMode::kStrict);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInfeasible) return false;
    throw;
  }
  std::vector<int> appearances(p.graph.size(), 0);
  std::vector<int> slack(p.graph.size(), 0);
  bool has_slack = false;
  for (const auto& [v, bit] : x) {
    if (v.kind() == VarKind::kCountSlack) {
      has_slack = true;
      slack[v.table()] += bit ? 1 : 0;
    }
  }
  if (!has_slack) return true;
  // Appearances come from the joins actually set, not a re-encoding.
  for (int r = 0; r < rank_count(p.graph); ++r)
    for (const auto& e : p.graph.edges())
      if (x.at(VariableId::join(e.u, e.v, r))) {
        ++appearances[e.u];
        ++appearances[e.v];
      }
  for (int t = 0; t < p.graph.size(); ++t)
    if (slack[t] != appearances[t] - 1) return false;
  return true;
}

/// Every cross-product-free left-deep order with order[0] < order[1]
/// (the rank-0 join is unordered), in lexicographic order.
inline std::vector<std::vector<RelationId>> adherent_orders(const QueryGraph& g) {
  std::vector<std::vector<RelationId>> out;
  std::vector<RelationId> cur;
  auto rec = [&](auto&& self, RelationSet joined) -> void {
    if (static_cast<int>(cur.size()) == g.size()) {
      out.push_back(cur);
      return;
    }
    for (RelationId t = 0; t < g.size(); ++t) {
      if (contains(joined, t)) continue;
      if (cur.size() == 1 && t < cur[0]) continue;
      if (!cur.empty() && (g.neighbors(t) & joined) == 0) continue;
      cur.push_back(t);
      self(self, joined | singleton(t));
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Sidecar written next to a dumped problem polynomial.
inline nlohmann::json problem_sidecar(const Problem& p) {
  return {{"method", to_string(p.method)},
          {"semantics", to_string(p.semantics)},
          {"cost_scale", p.cost_scale},
          {"penalty_C", p.penalty_C},
          {"heuristic_n", p.heuristic_n},
          {"variable_count", p.variables().size()},
          {"graph", to_json(p.graph)}};
}

/// Rebuilds the problem a sidecar describes.
inline Problem problem_from_sidecar(const nlohmann::json& j) {
  try {
    const QueryGraph g = query_graph_from_json(j.at("graph"));
    const Method m = parse_method(j.at("method").get<std::string>());
    const int n = j.value("heuristic_n", 1);
    return build_problem(g, m, n < 1 ? 1 : n);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformed, std::string("problem sidecar: ") + e.what());
  }
}

}  // namespace hubojoin
