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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "hubojoin/error.hpp"
#include "hubojoin/polynomial.hpp"

namespace hubojoin {

enum class ReductionMethod { kMinSelection, kSubstitution, kMixed };

inline std::string_view to_string(ReductionMethod m) {
  switch (m) {
    case ReductionMethod::kMinSelection: return "min-selection";
    case ReductionMethod::kSubstitution: return "substitution";
    case ReductionMethod::kMixed: return "mixed";
  }
  return "";
}

inline ReductionMethod parse_reduction_method(std::string_view s) {
  for (auto m : {ReductionMethod::kMinSelection, ReductionMethod::kSubstitution,
                 ReductionMethod::kMixed}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown reduction method '" + std::string(s) + "'");
}

/// One auxiliary variable. At a minimum it takes the value of the product of
/// `defines` (with `complemented`, if set, entering as 1 - x).
struct AuxDefinition {
  VariableId aux;
  std::vector<VariableId> defines;
  /// M for substitution, |c| for min-selection.
  double penalty_weight = 0.0;
  std::optional<VariableId> complemented;
  ReductionMethod method = ReductionMethod::kSubstitution;

  /// Value the aux should carry under `x`; missing definers (other aux) count via `x`.
  bool expected(const Assignment& x) const {
    for (const auto& v : defines) {
      bool b = x.at(v);
      if (complemented && *complemented == v) b = !b;
      if (!b) return false;
    }
    return true;
  }
};

struct ReductionMap {
  ReductionMethod method = ReductionMethod::kMixed;
  std::vector<AuxDefinition> introduced;
};

struct Reduction {
  Polynomial qubo;
  ReductionMap map;
};

namespace detail {

inline int next_aux_serial(const Polynomial& p) {
  int next = 0;
  for (const auto& v : p.vars())
    if (v.kind() == VarKind::kAux) next = std::max(next, v.serial() + 1);
  return next;
}

// c * prod(m) with c < 0 becomes c * w * (sum m - (d - 1)).
inline void min_select_negative(const Monomial& m, double c, VariableId w, Polynomial& out) {
  for (const auto& v : m) out.add_term({v, w}, c);
  out.add_term({w}, -c * static_cast<double>(m.size() - 1));
}

// c * prod(m) with c > 0, as negative terms over complemented last variables:
//   c * P * x_d = c * P + min_w (-c) * w * (sum_{i<d} x_i - x_d - d + 2)
// iterated until the remaining positive product is quadratic.
inline void min_select_positive(Monomial m, double c, int& serial, ReductionMap& map,
                                Polynomial& out) {
  while (m.size() > 2) {
    const VariableId w = VariableId::aux(serial++);
    const VariableId last = m.back();
    const double d = static_cast<double>(m.size());
    for (std::size_t i = 0; i + 1 < m.size(); ++i) out.add_term({m[i], w}, -c);
    out.add_term({last, w}, c);
    out.add_term({w}, -c * (2.0 - d));
    map.introduced.push_back({w, m, c, last, ReductionMethod::kMinSelection});
    m.pop_back();
  }
  out.add_canonical(m, c);
}

}  // namespace detail

/// Quadratizes `p` preserving its minimum value.
///
///   min-selection  negative c * prod x  ->  c * w * (sum x - (d - 1)), one
///                  aux per term; positive terms are split through a
///                  complemented variable into negative ones.
///   substitution   repeatedly replaces the most frequent variable pair in
///                  terms of degree >= 3 by w and adds
///                  M * (xy - 2xw - 2yw + 3w), M = 1 + sum |c| of the terms
///                  rewritten.
///   mixed          negative terms by min-selection, positive by substitution.
inline Reduction reduce(const Polynomial& p, ReductionMethod method = ReductionMethod::kMixed) {
  Reduction out{Polynomial(p.constant()), {method, {}}};
  int serial = detail::next_aux_serial(p);
  std::map<Monomial, double> pending;  // high-degree terms awaiting substitution
  for (const auto& [m, c] : p.terms()) {
    if (m.size() <= 2) {
      out.qubo.add_canonical(m, c);
      continue;
    }
    const bool negative = c < 0.0;
    if (method == ReductionMethod::kSubstitution ||
        (method == ReductionMethod::kMixed && !negative)) {
      pending[m] += c;
    } else if (negative) {
      const VariableId w = VariableId::aux(serial++);
      detail::min_select_negative(m, c, w, out.qubo);
      out.map.introduced.push_back({w, m, -c, std::nullopt, ReductionMethod::kMinSelection});
    } else {
      detail::min_select_positive(m, c, serial, out.map, out.qubo);
    }
  }

  while (!pending.empty()) {
    std::map<std::pair<VariableId, VariableId>, int> freq;
    for (const auto& [m, c] : pending)
      for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) ++freq[{m[i], m[j]}];
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
      if (it->second > best->second) best = it;
    const auto [x, y] = best->first;
    const VariableId w = VariableId::aux(serial++);

    double weight = 1.0;
    std::map<Monomial, double> next;
    for (const auto& [m, c] : pending) {
      const bool hit = std::binary_search(m.begin(), m.end(), x) &&
                       std::binary_search(m.begin(), m.end(), y);
      if (!hit) {
        next[m] += c;
        continue;
      }
      weight += std::abs(c);
      Monomial r;
      for (const auto& v : m)
        if (v != x && v != y) r.push_back(v);
      r = monomial_product(r, {w});
      if (r.size() <= 2) {
        out.qubo.add_canonical(r, c);
      } else {
        next[r] += c;
      }
    }
    out.qubo.add_term({x, y}, weight);
    out.qubo.add_term({x, w}, -2.0 * weight);
    out.qubo.add_term({y, w}, -2.0 * weight);
    out.qubo.add_term({w}, 3.0 * weight);
    out.map.introduced.push_back({w, {x, y}, weight, std::nullopt, ReductionMethod::kSubstitution});
    pending = std::move(next);
  }
  return out;
}

struct Lifted {
  Assignment assignment;
  /// Some aux differs from the product it stands for.
  bool aux_inconsistent = false;
};

/// Restricts a reduced assignment to the source variables.
inline Lifted lift(const Assignment& reduced, const ReductionMap& map) {
  Lifted out;
  std::set<VariableId> introduced;
  for (const auto& a : map.introduced) introduced.insert(a.aux);
  for (const auto& [v, b] : reduced)
    if (!introduced.count(v)) out.assignment.emplace(v, b);
  for (const auto& a : map.introduced) {
    auto it = reduced.find(a.aux);
    if (it == reduced.end()) continue;
    bool known = true;
    for (const auto& v : a.defines) known = known && reduced.count(v) > 0;
    if (known && it->second != a.expected(reduced)) out.aux_inconsistent = true;
  }
  return out;
}

/// Dense QUBO view of a polynomial of degree <= 2.
struct QuboMatrix {
  std::vector<VariableId> vars;
  double offset = 0.0;
  /// (i, j, coeff) with i <= j; i == j holds linear terms.
  std::vector<std::tuple<int, int, double>> entries;
};

inline QuboMatrix to_qubo_matrix(const Polynomial& p) {
  if (!p.is_quadratic()) throw Error(ErrorKind::kInvalidArgument, "polynomial is not quadratic");
  QuboMatrix q;
  const auto vs = p.vars();
  q.vars.assign(vs.begin(), vs.end());
  q.offset = p.constant();
  auto index = [&](const VariableId& v) {
    return static_cast<int>(std::lower_bound(q.vars.begin(), q.vars.end(), v) - q.vars.begin());
  };
  for (const auto& [m, c] : p.terms()) {
    const int i = index(m[0]);
    const int j = m.size() == 2 ? index(m[1]) : i;
    q.entries.emplace_back(i, j, c);
  }
  std::sort(q.entries.begin(), q.entries.end());
  return q;
}

/// Coordinate-list text for external QUBO solvers:
///   # vars N
///   # offset c
///   i j coeff        (i <= j; i == j is linear)
///   # i name         (legend)
inline std::string to_qubo_text(const Polynomial& p) {
  const QuboMatrix q = to_qubo_matrix(p);
  std::ostringstream out;
  out << "# vars " << q.vars.size() << "\n";
  out << "# offset " << detail::format_double(q.offset) << "\n";
  for (const auto& [i, j, c] : q.entries)
    out << i << " " << j << " " << detail::format_double(c) << "\n";
  for (std::size_t i = 0; i < q.vars.size(); ++i) out << "# " << i << " " << q.vars[i].name() << "\n";
  return out.str();
}

}  // namespace hubojoin
