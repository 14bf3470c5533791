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
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hubojoin/error.hpp"
#include "hubojoin/query_graph.hpp"

namespace hubojoin {

/// Binary join tree: a leaf relation or a join of two subtrees. Nodes are
/// shared and immutable, so copies are cheap and trees are value types.
class JoinTree {
 public:
  static JoinTree leaf(RelationId r) {
    auto n = std::make_shared<Node>();
    n->relation = r;
    return JoinTree(std::move(n));
  }

  static JoinTree join(JoinTree left, JoinTree right) {
    auto n = std::make_shared<Node>();
    n->left = std::move(left.node_);
    n->right = std::move(right.node_);
    return JoinTree(std::move(n));
  }

  bool is_leaf() const { return node_->relation >= 0; }
  RelationId relation() const { return node_->relation; }
  JoinTree left() const { return JoinTree(node_->left); }
  JoinTree right() const { return JoinTree(node_->right); }

  /// Leaves in left-to-right order.
  std::vector<RelationId> leaves() const {
    std::vector<RelationId> out;
    collect(*node_, out);
    return out;
  }

  bool is_left_deep() const {
    for (const Node* n = node_.get(); n->relation < 0; n = n->left.get()) {
      if (n->right->relation < 0) return false;
    }
    return true;
  }

  /// Nested-bracket rendering, e.g. "[[0,1],2]".
  std::string to_string() const {
    std::string s;
    render(*node_, s);
    return s;
  }

  friend bool operator==(const JoinTree& a, const JoinTree& b) {
    return equal(*a.node_, *b.node_);
  }

 private:
  struct Node {
    RelationId relation = -1;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit JoinTree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void collect(const Node& n, std::vector<RelationId>& out) {
    if (n.relation >= 0) {
      out.push_back(n.relation);
      return;
    }
    collect(*n.left, out);
    collect(*n.right, out);
  }
  static void render(const Node& n, std::string& s) {
    if (n.relation >= 0) {
      s += std::to_string(n.relation);
      return;
    }
    s += '[';
    render(*n.left, s);
    s += ',';
    render(*n.right, s);
    s += ']';
  }
  static bool equal(const Node& a, const Node& b) {
    if (a.relation != b.relation) return false;
    if (a.relation >= 0) return true;
    return equal(*a.left, *b.left) && equal(*a.right, *b.right);
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

inline RelationSet leaf_set(const JoinTree& t, const QueryGraph& g) {
  RelationSet s = 0;
  for (RelationId r : t.leaves()) {
    if (r < 0 || r >= g.size()) {
      throw Error(ErrorKind::kUnknownRelation, "tree leaf " + std::to_string(r) +
                                                   " is not a relation of the graph");
    }
    s |= singleton(r);
  }
  return s;
}

inline double cross_selectivity(RelationSet a, RelationSet b, const QueryGraph& g) {
  double f = 1.0;
  for (RelationId i : members(a))
    for (RelationId j : members(b)) f *= g.selectivity(i, j);
  return f;
}

}  // namespace detail

/// Result size of `t`: a leaf's cardinality, or the product of both child
/// sizes and every selectivity between them (missing predicates count 1).
inline double cardinality(const JoinTree& t, const QueryGraph& g) {
  if (t.is_leaf()) return g.cardinality(t.relation());
  const JoinTree l = t.left();
  const JoinTree r = t.right();
  return detail::cross_selectivity(detail::leaf_set(l, g), detail::leaf_set(r, g), g) *
         cardinality(l, g) * cardinality(r, g);
}

/// Sum of the result sizes of every join in `t`; leaves cost nothing.
inline double cost(const JoinTree& t, const QueryGraph& g) {
  if (t.is_leaf()) {
    (void)g.cardinality(t.relation());
    return 0.0;
  }
  return cardinality(t, g) + cost(t.left(), g) + cost(t.right(), g);
}

// Log-domain variants. Only meant for relative comparisons once |V| grows
// past the point where exact products overflow a double.
inline double log_cardinality(const JoinTree& t, const QueryGraph& g) {
  if (t.is_leaf()) return std::log(g.cardinality(t.relation()));
  const JoinTree l = t.left();
  const JoinTree r = t.right();
  double s = log_cardinality(l, g) + log_cardinality(r, g);
  for (RelationId i : members(detail::leaf_set(l, g)))
    for (RelationId j : members(detail::leaf_set(r, g))) s += std::log(g.selectivity(i, j));
  return s;
}

inline double log_cost(const JoinTree& t, const QueryGraph& g) {
  if (t.is_leaf()) return -INFINITY;
  const double a = log_cardinality(t, g);
  const double b = log_cost(t.left(), g);
  const double c = log_cost(t.right(), g);
  const double m = std::max({a, b, c});
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

/// True iff every relation of `g` appears exactly once and every join has at
/// least one predicate edge between its two sides (no cross products).
inline bool adheres(const JoinTree& t, const QueryGraph& g) {
  const auto leaves = t.leaves();
  RelationSet seen = 0;
  for (RelationId r : leaves) {
    if (r < 0 || r >= g.size() || contains(seen, r)) return false;
    seen |= singleton(r);
  }
  if (seen != g.all()) return false;
  struct Walk {
    const QueryGraph& g;
    bool ok = true;
    RelationSet operator()(const JoinTree& n) {
      if (n.is_leaf()) return singleton(n.relation());
      const RelationSet a = (*this)(n.left());
      const RelationSet b = (*this)(n.right());
      if ((g.neighbors(a) & b) == 0) ok = false;
      return a | b;
    }
  } walk{g};
  walk(t);
  return walk.ok;
}

/// Left fold of `order` into a left-deep tree: [[[o0,o1],o2],...].
inline JoinTree leftdeep_from_order(std::span<const RelationId> order) {
  if (order.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "a join order needs at least two relations");
  }
  std::vector<RelationId> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::kDuplicate, "duplicate relation in join order");
  }
  JoinTree t = JoinTree::leaf(order[0]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    t = JoinTree::join(std::move(t), JoinTree::leaf(order[i]));
  }
  return t;
}

inline JoinTree leftdeep_from_order(std::initializer_list<RelationId> order) {
  return leftdeep_from_order(std::span<const RelationId>(order.begin(), order.size()));
}

/// Cost of the left-deep plan `order` computed from prefix set cardinalities.
/// Agrees with cost(leftdeep_from_order(order), g).
inline double order_cost(std::span<const RelationId> order, const QueryGraph& g) {
  double total = 0.0;
  RelationSet s = singleton(order[0]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    s |= singleton(order[i]);
    total += g.set_cardinality(s);
  }
  return total;
}

}  // namespace hubojoin
