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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubojoin/error.hpp"
#include "hubojoin/random.hpp"

namespace hubojoin {

using RelationId = int;

/// Bitmask over relation ids; bounds graphs to 64 relations.
using RelationSet = std::uint64_t;

inline constexpr int kMaxRelations = 64;

inline RelationSet singleton(RelationId r) { return RelationSet{1} << r; }
inline bool contains(RelationSet s, RelationId r) { return (s >> r) & 1U; }
inline int set_size(RelationSet s) { return std::popcount(s); }

inline std::vector<RelationId> members(RelationSet s) {
  std::vector<RelationId> out;
  while (s != 0) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

enum class Shape { kChain, kStar, kCycle, kTree, kClique, kCustom };

inline std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::kChain: return "chain";
    case Shape::kStar: return "star";
    case Shape::kCycle: return "cycle";
    case Shape::kTree: return "tree";
    case Shape::kClique: return "clique";
    case Shape::kCustom: return "custom";
  }
  return "custom";
}

inline Shape parse_shape(std::string_view name) {
  for (Shape s : {Shape::kChain, Shape::kStar, Shape::kCycle, Shape::kTree,
                  Shape::kClique, Shape::kCustom}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown shape '" + std::string(name) + "'");
}

struct JoinEdge {
  RelationId u = 0;
  RelationId v = 0;
  double selectivity = 1.0;

  friend bool operator==(const JoinEdge&, const JoinEdge&) = default;
};

/// Undirected query graph: relations 0..n-1 with cardinalities, join edges
/// with selectivities. Immutable once constructed; the constructor enforces
/// every invariant (ids, ranges, no duplicates, connectivity).
class QueryGraph {
 public:
  QueryGraph(Shape shape, std::vector<double> cardinalities,
             std::vector<JoinEdge> edges)
      : shape_(shape), cards_(std::move(cardinalities)), edges_(std::move(edges)) {
    const int n = static_cast<int>(cards_.size());
    if (n < 1 || n > kMaxRelations) {
      throw Error(ErrorKind::kInvariant, "relation count must be in [1, 64]");
    }
    for (double c : cards_) {
      if (!(c >= 1.0)) {
        throw Error(ErrorKind::kInvariant, "cardinality must be >= 1");
      }
    }
    for (auto& e : edges_) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
        throw Error(ErrorKind::kUnknownRelation, "edge references unknown relation");
      }
      if (e.u == e.v) throw Error(ErrorKind::kInvariant, "self-loop edge");
      if (!(e.selectivity > 0.0 && e.selectivity <= 1.0)) {
        throw Error(ErrorKind::kInvariant, "selectivity must be in (0, 1]");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(), [](const JoinEdge& a, const JoinEdge& b) {
      return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
    sel_.assign(static_cast<std::size_t>(n) * n, 1.0);
    edge_index_.assign(static_cast<std::size_t>(n) * n, -1);
    adjacency_.assign(n, 0);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      if (edge_index_[idx(e.u, e.v)] >= 0) {
        throw Error(ErrorKind::kDuplicate, "duplicate edge");
      }
      sel_[idx(e.u, e.v)] = sel_[idx(e.v, e.u)] = e.selectivity;
      edge_index_[idx(e.u, e.v)] = edge_index_[idx(e.v, e.u)] = static_cast<int>(k);
      adjacency_[e.u] |= singleton(e.v);
      adjacency_[e.v] |= singleton(e.u);
    }
    if (!is_connected(all())) {
      throw Error(ErrorKind::kDisconnected, "query graph is not connected");
    }
  }

  Shape shape() const { return shape_; }
  int size() const { return static_cast<int>(cards_.size()); }
  RelationSet all() const {
    return size() == 64 ? ~RelationSet{0} : (RelationSet{1} << size()) - 1;
  }
  double cardinality(RelationId r) const {
    check(r);
    return cards_[r];
  }
  const std::vector<double>& cardinalities() const { return cards_; }
  const std::vector<JoinEdge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  /// Stored selectivity of (i, j), or exactly 1 when no predicate connects them.
  double selectivity(RelationId i, RelationId j) const {
    check(i);
    check(j);
    if (i == j) throw Error(ErrorKind::kInvalidArgument, "selectivity of a relation with itself");
    return sel_[idx(i, j)];
  }

  bool has_edge(RelationId i, RelationId j) const {
    return i != j && edge_index_[idx(i, j)] >= 0;
  }

  /// Index into edges() for (i, j), or -1.
  int edge_index(RelationId i, RelationId j) const { return edge_index_[idx(i, j)]; }

  RelationSet neighbors(RelationId r) const { return adjacency_[r]; }

  RelationSet neighbors(RelationSet s) const {
    RelationSet out = 0;
    for (RelationId r : members(s)) out |= adjacency_[r];
    return out & ~s;
  }

  bool is_connected(RelationSet s) const {
    if (s == 0) return false;
    RelationSet seen = s & (~s + 1);
    RelationSet frontier = seen;
    while (frontier != 0) {
      RelationSet next = 0;
      for (RelationId r : members(frontier)) next |= adjacency_[r];
      next &= s & ~seen;
      seen |= next;
      frontier = next;
    }
    return seen == s;
  }

  bool is_complete() const {
    return edge_count() == size() * (size() - 1) / 2;
  }
  bool is_acyclic() const { return edge_count() == size() - 1; }

  /// Cardinality of the intermediate result over `s`: product of member
  /// cardinalities and the selectivities of all edges inside `s`.
  double set_cardinality(RelationSet s) const {
    double card = 1.0;
    for (RelationId r : members(s)) card *= cards_[r];
    for (const auto& e : edges_) {
      if (contains(s, e.u) && contains(s, e.v)) card *= e.selectivity;
    }
    return card;
  }

  friend bool operator==(const QueryGraph& a, const QueryGraph& b) {
    return a.shape_ == b.shape_ && a.cards_ == b.cards_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t idx(RelationId i, RelationId j) const {
    return static_cast<std::size_t>(i) * cards_.size() + j;
  }
  void check(RelationId r) const {
    if (r < 0 || r >= size()) {
      throw Error(ErrorKind::kUnknownRelation,
                  "unknown relation id " + std::to_string(r));
    }
  }

  Shape shape_;
  std::vector<double> cards_;
  std::vector<JoinEdge> edges_;
  std::vector<double> sel_;
  std::vector<int> edge_index_;
  std::vector<RelationSet> adjacency_;
};

namespace detail {

// Uniform labeled tree on n >= 2 nodes via a random Pruefer sequence.
inline std::vector<std::pair<int, int>> random_tree_edges(int n, Rng& rng) {
  if (n == 2) return {{0, 1}};
  std::vector<int> seq(n - 2);
  for (auto& s : seq) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<int> degree(n, 1);
  for (int s : seq) ++degree[s];
  std::vector<std::pair<int, int>> out;
  for (int s : seq) {
    int leaf = 0;
    while (degree[leaf] != 1) ++leaf;
    out.emplace_back(leaf, s);
    --degree[leaf];
    --degree[s];
  }
  int a = -1;
  for (int i = 0; i < n; ++i) {
    if (degree[i] == 1) {
      if (a < 0) {
        a = i;
      } else {
        out.emplace_back(a, i);
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Topology generator with placeholder statistics (cardinality 1,
/// selectivity 1). Star centers on relation 0; tree draws a uniform labeled
/// tree from `seed`.
inline QueryGraph generate_shape(Shape shape, int n, std::uint64_t seed) {
  const int min_n = shape == Shape::kCycle ? 3 : 2;
  if (n < min_n || n > kMaxRelations) {
    throw Error(ErrorKind::kInvalidArgument,
                "invalid relation count " + std::to_string(n) + " for " +
                    std::string(to_string(shape)));
  }
  std::vector<std::pair<int, int>> pairs;
  switch (shape) {
    case Shape::kChain:
      for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
      break;
    case Shape::kStar:
      for (int i = 1; i < n; ++i) pairs.emplace_back(0, i);
      break;
    case Shape::kCycle:
      for (int i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
      pairs.emplace_back(0, n - 1);
      break;
    case Shape::kTree: {
      Rng rng(seed);
      pairs = detail::random_tree_edges(n, rng);
      break;
    }
    case Shape::kClique:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      break;
    case Shape::kCustom:
      throw Error(ErrorKind::kInvalidArgument, "cannot generate a custom shape");
  }
  std::vector<JoinEdge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
  return QueryGraph(shape, std::vector<double>(n, 1.0), std::move(edges));
}

/// Copy of `g` with cardinalities uniform in [card_lo, card_hi] and
/// selectivities uniform in (0, 1]. Draw order: relations by id, then edges
/// in canonical (u, v) order.
inline QueryGraph sample_statistics(const QueryGraph& g, double card_lo,
                                    double card_hi, std::uint64_t seed) {
  if (!(card_lo >= 1.0) || !(card_lo <= card_hi)) {
    throw Error(ErrorKind::kInvalidArgument, "need 1 <= card_lo <= card_hi");
  }
  Rng rng(seed);
  std::vector<double> cards(g.size());
  for (auto& c : cards) {
    c = card_lo + (card_hi - card_lo) * rng.uniform01();
  }
  std::vector<JoinEdge> edges = g.edges();
  for (auto& e : edges) e.selectivity = rng.uniform_open_closed();
  return QueryGraph(g.shape(), std::move(cards), std::move(edges));
}

inline nlohmann::json to_json(const QueryGraph& g) {
  nlohmann::json j;
  j["shape"] = std::string(to_string(g.shape()));
  auto& rels = j["relations"] = nlohmann::json::array();
  for (int i = 0; i < g.size(); ++i) {
    rels.push_back({{"id", i}, {"cardinality", g.cardinality(i)}});
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"u", e.u}, {"v", e.v}, {"selectivity", e.selectivity}});
  }
  return j;
}

inline QueryGraph query_graph_from_json(const nlohmann::json& j) {
  try {
    const Shape shape = parse_shape(j.at("shape").get<std::string>());
    const auto& rels = j.at("relations");
    std::vector<double> cards(rels.size(), 0.0);
    std::vector<bool> seen(rels.size(), false);
    for (const auto& r : rels) {
      const int id = r.at("id").get<int>();
      if (id < 0 || id >= static_cast<int>(rels.size()) || seen[id]) {
        throw Error(ErrorKind::kInvariant, "relation ids must be 0..|V|-1 and unique");
      }
      seen[id] = true;
      cards[id] = r.at("cardinality").get<double>();
    }
    std::vector<JoinEdge> edges;
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at("u").get<int>(), e.at("v").get<int>(),
                       e.at("selectivity").get<double>()});
    }
    return QueryGraph(shape, std::move(cards), std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformed, std::string("malformed query graph: ") + e.what());
  }
}

inline std::string save_json(const QueryGraph& g) { return to_json(g).dump(2) + "\n"; }

inline QueryGraph load_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformed, std::string("malformed JSON: ") + e.what());
  }
  return query_graph_from_json(j);
}

}  // namespace hubojoin
