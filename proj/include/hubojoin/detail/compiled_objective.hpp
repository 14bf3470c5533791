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
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "hubojoin/polynomial.hpp"

namespace hubojoin::detail {

/// Flat, index-based form of a StructuredPolynomial for local search.
///
/// Every term keeps its count of zero-valued variables. Each variable owns one
/// "field" per group it touches (group 0: plain terms, group g > 0: squared
/// block g - 1), equal to the summed coefficients of its terms in that group
/// whose other variables are all one. Flipping v changes group g's value by
/// +/- field, so a proposal costs O(groups of v).
class CompiledObjective {
 public:
  explicit CompiledObjective(const StructuredPolynomial& p,
                             const std::vector<VariableId>& extra_vars = {}) {
    std::set<VariableId> vs = p.vars();
    vs.insert(extra_vars.begin(), extra_vars.end());
    vars_.assign(vs.begin(), vs.end());
    const int n = static_cast<int>(vars_.size());
    var_slots_.resize(n);

    constant_ = p.plain().constant();
    group_weight_.push_back(0.0);
    group_constant_.push_back(0.0);
    for (const auto& [m, c] : p.plain().terms()) add_term(m, c, 0);
    for (const auto& b : p.blocks()) {
      const int g = static_cast<int>(group_weight_.size());
      group_weight_.push_back(b.weight);
      double k = b.constant;
      for (const auto& [m, c] : b.terms) {
        if (m.empty()) {
          k += c;
        } else {
          add_term(m, c, g);
        }
      }
      group_constant_.push_back(k);
    }
    var_terms_.resize(n);
    for (std::size_t t = 0; t < terms_.size(); ++t)
      for (int i = terms_[t].begin; i < terms_[t].end; ++i) var_terms_[term_vars_[i]].push_back(t);
    state_.assign(n, 0);
    reset(state_);
  }

  int size() const { return static_cast<int>(vars_.size()); }
  const std::vector<VariableId>& vars() const { return vars_; }
  const std::vector<std::uint8_t>& state() const { return state_; }
  double energy() const { return energy_; }

  /// Sets the state and recomputes every cached quantity from scratch.
  void reset(const std::vector<std::uint8_t>& bits) {
    state_ = bits;
    std::fill(field_.begin(), field_.end(), 0.0);
    group_sum_.assign(group_weight_.size(), 0.0);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      auto& term = terms_[t];
      term.zeros = 0;
      for (int i = term.begin; i < term.end; ++i) term.zeros += state_[term_vars_[i]] ? 0 : 1;
      if (term.zeros == 0) group_sum_[term.group] += term.coeff;
      for (int i = term.begin; i < term.end; ++i) {
        if (others_one(term, term_vars_[i])) field_[term_slots_[i]] += term.coeff;
      }
    }
    energy_ = constant_ + group_sum_[0];
    for (std::size_t g = 1; g < group_weight_.size(); ++g) {
      const double s = group_constant_[g] + group_sum_[g];
      energy_ += group_weight_[g] * s * s;
    }
  }

  /// Energy change if variable v were flipped.
  double delta(int v) const {
    const double sign = state_[v] ? -1.0 : 1.0;
    double d = 0.0;
    for (const auto& [g, slot] : var_slots_[v]) {
      const double dl = sign * field_[slot];
      if (g == 0) {
        d += dl;
      } else if (dl != 0.0) {
        const double s = group_constant_[g] + group_sum_[g];
        d += group_weight_[g] * dl * (2.0 * s + dl);
      }
    }
    return d;
  }

  void flip(int v) { flip(v, delta(v)); }

  /// Flips v, given its precomputed delta.
  void flip(int v, double d) {
    const double sign = state_[v] ? -1.0 : 1.0;
    for (const auto& [g, slot] : var_slots_[v]) group_sum_[g] += sign * field_[slot];
    energy_ += d;
    const bool on = state_[v] == 0;
    state_[v] = on ? 1 : 0;
    for (std::size_t t : var_terms_[v]) {
      auto& term = terms_[t];
      const int before = term.zeros;
      const int after = before + (on ? -1 : 1);
      term.zeros = after;
      // For u != v, "others of u are one" means zeros - (1 - x_u) == 0.
      for (int i = term.begin; i < term.end; ++i) {
        const int u = term_vars_[i];
        if (u == v) continue;
        const int own = state_[u] ? 0 : 1;
        const bool was = before - own == 0;
        const bool now = after - own == 0;
        if (was != now) field_[term_slots_[i]] += now ? term.coeff : -term.coeff;
      }
    }
  }

 private:
  struct Term {
    int begin = 0;
    int end = 0;
    int group = 0;
    int zeros = 0;
    double coeff = 0.0;
  };

  bool others_one(const Term& t, int v) const {
    return t.zeros - (state_[v] ? 0 : 1) == 0;
  }

  int index_of(const VariableId& v) const {
    return static_cast<int>(std::lower_bound(vars_.begin(), vars_.end(), v) - vars_.begin());
  }

  int slot_for(int var, int group) {
    for (const auto& [g, s] : var_slots_[var])
      if (g == group) return s;
    const int s = static_cast<int>(field_.size());
    field_.push_back(0.0);
    var_slots_[var].emplace_back(group, s);
    return s;
  }

  void add_term(const Monomial& m, double c, int group) {
    if (m.empty()) {
      if (group == 0) constant_ += c;
      return;
    }
    Term t;
    t.begin = static_cast<int>(term_vars_.size());
    t.group = group;
    t.coeff = c;
    for (const auto& v : m) {
      const int i = index_of(v);
      term_vars_.push_back(i);
      term_slots_.push_back(slot_for(i, group));
    }
    t.end = static_cast<int>(term_vars_.size());
    terms_.push_back(t);
  }

  std::vector<VariableId> vars_;
  double constant_ = 0.0;
  std::vector<double> group_weight_;
  std::vector<double> group_constant_;
  std::vector<double> group_sum_;
  std::vector<Term> terms_;
  std::vector<int> term_vars_;
  std::vector<int> term_slots_;
  std::vector<std::vector<std::size_t>> var_terms_;
  std::vector<std::vector<std::pair<int, int>>> var_slots_;
  std::vector<double> field_;
  std::vector<std::uint8_t> state_;
  double energy_ = 0.0;
};

inline Assignment to_assignment(const std::vector<VariableId>& vars,
                                const std::vector<std::uint8_t>& bits) {
  Assignment x;
  for (std::size_t i = 0; i < vars.size(); ++i) x.emplace_hint(x.end(), vars[i], bits[i] != 0);
  return x;
}

}  // namespace hubojoin::detail
