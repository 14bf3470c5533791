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
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hubojoin/error.hpp"
#include "hubojoin/join_tree.hpp"
#include "hubojoin/query_graph.hpp"

namespace hubojoin {

struct Plan {
  std::vector<RelationId> order;
  JoinTree tree;
  double cost = 0.0;
};

inline constexpr int kDpMaxRelations = 22;

namespace detail {

inline Plan dp_left_deep(const QueryGraph& g, bool allow_cross) {
  const int n = g.size();
  if (n > kDpMaxRelations) {
    throw Error(ErrorKind::kSizeCap, "dynamic programming is capped at " +
                                         std::to_string(kDpMaxRelations) + " relations");
  }
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two relations");
  const std::size_t full = (std::size_t{1} << n) - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(full + 1, kInf);
  std::vector<double> card(full + 1, 0.0);
  std::vector<signed char> last(full + 1, -1);
  for (int r = 0; r < n; ++r) {
    best[std::size_t{1} << r] = 0.0;
    card[std::size_t{1} << r] = g.cardinality(r);
  }
  for (std::size_t s = 1; s <= full; ++s) {
    if (std::has_single_bit(s)) continue;
    const RelationSet set = s;
    // |S| = |S \ r| * |R_r| * selectivities between them, for any r in S.
    const int any = std::countr_zero(s);
    const std::size_t rest_any = s & ~(std::size_t{1} << any);
    card[s] = card[rest_any] * g.cardinality(any);
    for (RelationSet m = rest_any; m != 0; m &= m - 1) card[s] *= g.selectivity(any, std::countr_zero(m));
    if (!allow_cross && !g.is_connected(set)) continue;
    for (RelationSet m = set; m != 0; m &= m - 1) {
      const int r = std::countr_zero(m);
      const std::size_t rest = s & ~(std::size_t{1} << r);
      if (best[rest] == kInf) continue;
      if (!allow_cross && (g.neighbors(r) & rest) == 0) continue;
      const double c = best[rest] + card[s];
      if (c < best[s]) {
        best[s] = c;
        last[s] = static_cast<signed char>(r);
      }
    }
  }
  if (best[full] == kInf) throw Error(ErrorKind::kDisconnected, "query graph is disconnected");
  std::vector<RelationId> order;
  std::size_t s = full;
  while (!std::has_single_bit(s)) {
    order.push_back(last[s]);
    s &= ~(std::size_t{1} << last[s]);
  }
  order.push_back(std::countr_zero(s));
  std::reverse(order.begin(), order.end());
  if (order.size() >= 2 && order[0] > order[1]) std::swap(order[0], order[1]);
  return Plan{order, leftdeep_from_order(order), best[full]};
}

}  // namespace detail

/// Optimal left-deep plan, cross products allowed (bitmask DP over all
/// subsets, capped at kDpMaxRelations).
inline Plan dp_with_cross(const QueryGraph& g) { return detail::dp_left_deep(g, true); }

inline constexpr std::size_t kMaxConnectedSubsets = std::size_t{1} << 22;

/// Optimal cross-product-free left-deep plan. Only connected subsets are
/// visited, level by level, each extended by adjacent relations, so sparse
/// shapes (chains, cycles) scale far past the subset-table cap.
inline Plan dp_without_cross(const QueryGraph& g) {
  const int n = g.size();
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two relations");
  if (!g.is_connected(g.all())) throw Error(ErrorKind::kDisconnected, "query graph is disconnected");
  struct Entry {
    double cost = 0.0;
    double card = 0.0;
    int last = -1;
  };
  std::vector<std::unordered_map<RelationSet, Entry>> levels(n + 1);
  for (int r = 0; r < n; ++r) levels[1][singleton(r)] = {0.0, g.cardinality(r), r};
  std::size_t visited = static_cast<std::size_t>(n);
  for (int k = 2; k <= n; ++k) {
    std::vector<RelationSet> sets;
    for (const auto& [s, e] : levels[k - 1]) {
      for (RelationSet m = g.neighbors(s); m != 0; m &= m - 1) sets.push_back(s | (m & -m));
    }
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    visited += sets.size();
    if (visited > kMaxConnectedSubsets) {
      throw Error(ErrorKind::kSizeCap, "too many connected subsets for dynamic programming");
    }
    auto& level = levels[k];
    for (RelationSet s : sets) {
      Entry best{std::numeric_limits<double>::infinity(), 0.0, -1};
      for (RelationSet m = s; m != 0; m &= m - 1) {
        const int r = std::countr_zero(m);
        const RelationSet rest = s & ~singleton(r);
        const RelationSet linked = g.neighbors(r) & rest;
        if (linked == 0) continue;
        auto it = levels[k - 1].find(rest);
        if (it == levels[k - 1].end()) continue;
        if (best.last < 0) {
          // |S| = |S \ r| * |R_r| * selectivities of r's edges into S \ r.
          best.card = it->second.card * g.cardinality(r);
          for (RelationSet q = linked; q != 0; q &= q - 1) best.card *= g.selectivity(r, std::countr_zero(q));
        }
        const double c = it->second.cost + best.card;
        if (c < best.cost) {
          best.cost = c;
          best.last = r;
        }
      }
      level.emplace(s, best);
    }
  }
  std::vector<RelationId> order;
  RelationSet s = g.all();
  for (int k = n; k >= 1; --k) {
    const int r = levels[k].at(s).last;
    order.push_back(r);
    s &= ~singleton(r);
  }
  std::reverse(order.begin(), order.end());
  if (order.size() >= 2 && order[0] > order[1]) std::swap(order[0], order[1]);
  return Plan{order, leftdeep_from_order(order), levels[n].at(g.all()).cost};
}

/// Cheapest first join f * |R_u| * |R_v| (ties: smallest (u, v)), then the
/// adjacent relation giving the smallest total cost (ties: smallest id).
inline Plan greedy_without_cross(const QueryGraph& g) {
  if (g.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two relations");
  const JoinEdge* first = nullptr;
  double first_cost = std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges()) {
    const double c = e.selectivity * g.cardinality(e.u) * g.cardinality(e.v);
    if (c < first_cost) {
      first_cost = c;
      first = &e;
    }
  }
  if (first == nullptr) throw Error(ErrorKind::kDisconnected, "query graph has no edges");
  std::vector<RelationId> order = {first->u, first->v};
  RelationSet joined = singleton(first->u) | singleton(first->v);
  double total = first_cost;
  double size = first_cost;
  while (static_cast<int>(order.size()) < g.size()) {
    const RelationSet frontier = g.neighbors(joined);
    if (frontier == 0) throw Error(ErrorKind::kDisconnected, "query graph is disconnected");
    int pick = -1;
    double pick_size = 0.0;
    for (RelationSet m = frontier; m != 0; m &= m - 1) {
      const int t = std::countr_zero(m);
      double s = size * g.cardinality(t);
      for (RelationSet k = joined; k != 0; k &= k - 1) s *= g.selectivity(t, std::countr_zero(k));
      if (pick < 0 || s < pick_size) {
        pick = t;
        pick_size = s;
      }
    }
    order.push_back(pick);
    joined |= singleton(pick);
    size = pick_size;
    total += size;
  }
  return Plan{order, leftdeep_from_order(order), total};
}

}  // namespace hubojoin
