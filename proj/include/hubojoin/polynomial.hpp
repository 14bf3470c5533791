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
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hubojoin/error.hpp"
#include "hubojoin/query_graph.hpp"

namespace hubojoin {

enum class VarKind : std::uint8_t { kJoin = 0, kCountSlack = 1, kAux = 2 };

/// Binary variable identifier. A tagged union of
///   join(u, v, rank)      edge (u, v) is performed at `rank`
///   count_slack(table, k) k-th unit slack of the table-count constraint
///   aux(serial)           auxiliary introduced by quadratization
/// The total order (kind, then fields; joins by rank first) fixes canonical
/// term keys and the variable order used by every solver.
class VariableId {
 public:
  constexpr VariableId() = default;

  static VariableId join(RelationId u, RelationId v, int rank) {
    if (u > v) std::swap(u, v);
    if (u == v) throw Error(ErrorKind::kInvalidArgument, "join variable needs two relations");
    return VariableId(VarKind::kJoin, rank, u, v);
  }
  static VariableId count_slack(RelationId table, int k) {
    return VariableId(VarKind::kCountSlack, table, k, 0);
  }
  static VariableId aux(int serial) { return VariableId(VarKind::kAux, serial, 0, 0); }

  VarKind kind() const { return kind_; }
  bool is_join() const { return kind_ == VarKind::kJoin; }

  // join accessors
  RelationId u() const { return b_; }
  RelationId v() const { return c_; }
  int rank() const { return a_; }
  RelationSet tables() const { return singleton(b_) | singleton(c_); }
  // count_slack accessors
  RelationId table() const { return a_; }
  int k() const { return b_; }
  // aux accessor
  int serial() const { return a_; }

  friend auto operator<=>(const VariableId&, const VariableId&) = default;

  /// Text form: x{u}_{v}^{rank}, y{table}_{k}, w{serial}.
  std::string name() const {
    switch (kind_) {
      case VarKind::kJoin:
        return "x" + std::to_string(b_) + "_" + std::to_string(c_) + "^" + std::to_string(a_);
      case VarKind::kCountSlack:
        return "y" + std::to_string(a_) + "_" + std::to_string(b_);
      case VarKind::kAux:
        return "w" + std::to_string(a_);
    }
    return {};
  }

  static VariableId parse(std::string_view s) {
    auto bad = [&] {
      return Error(ErrorKind::kMalformed, "bad variable name '" + std::string(s) + "'");
    };
    auto number = [&](std::string_view& rest) {
      int value = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec != std::errc() || ptr == rest.data()) throw bad();
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
      return value;
    };
    auto expect = [&](std::string_view& rest, char c) {
      if (rest.empty() || rest.front() != c) throw bad();
      rest.remove_prefix(1);
    };
    if (s.empty()) throw bad();
    std::string_view rest = s.substr(1);
    VariableId out;
    switch (s.front()) {
      case 'x': {
        const int u = number(rest);
        expect(rest, '_');
        const int v = number(rest);
        expect(rest, '^');
        const int r = number(rest);
        out = join(u, v, r);
        break;
      }
      case 'y': {
        const int t = number(rest);
        expect(rest, '_');
        out = count_slack(t, number(rest));
        break;
      }
      case 'w':
        out = aux(number(rest));
        break;
      default:
        throw bad();
    }
    if (!rest.empty()) throw bad();
    return out;
  }

 private:
  constexpr VariableId(VarKind kind, int a, int b, int c) : kind_(kind), a_(a), b_(b), c_(c) {}

  VarKind kind_ = VarKind::kJoin;
  int a_ = 0;
  int b_ = 0;
  int c_ = 0;
};

/// Sorted, duplicate-free product of variables.
using Monomial = std::vector<VariableId>;

inline Monomial make_monomial(std::vector<VariableId> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

/// Union of two canonical monomials (x*x = x).
inline Monomial monomial_product(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

using Assignment = std::map<VariableId, bool>;

inline bool monomial_value(const Monomial& m, const Assignment& x) {
  for (const auto& v : m) {
    auto it = x.find(v);
    if (it == x.end()) {
      throw Error(ErrorKind::kMissingVariable, "assignment lacks variable " + v.name());
    }
    if (!it->second) return false;
  }
  return true;
}

inline constexpr double kPruneTolerance = 1e-12;

/// Multilinear pseudo-Boolean polynomial: constant + sum_S alpha_S prod_{i in S} x_i.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double>;

  Polynomial() = default;
  explicit Polynomial(double constant) : constant_(constant) {}

  /// Accumulates `coeff` into the canonical key of `vars`; keys whose
  /// coefficient cancels are dropped.
  Polynomial& add_term(std::vector<VariableId> vars, double coeff) {
    return add_canonical(make_monomial(std::move(vars)), coeff);
  }

  /// Same as add_term for a key that is already sorted and unique.
  Polynomial& add_canonical(Monomial key, double coeff) {
    if (coeff == 0.0) return *this;
    if (key.empty()) {
      constant_ += coeff;
      return *this;
    }
    auto [it, inserted] = terms_.try_emplace(std::move(key), coeff);
    if (!inserted) {
      const double old = it->second;
      it->second += coeff;
      const double scale = std::max({1.0, std::abs(old), std::abs(coeff)});
      if (std::abs(it->second) <= kPruneTolerance * scale) terms_.erase(it);
    }
    return *this;
  }

  Polynomial& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  double constant() const { return constant_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty() && constant_ == 0.0; }

  double coefficient(const std::vector<VariableId>& vars) const {
    Monomial key = make_monomial(vars);
    if (key.empty()) return constant_;
    auto it = terms_.find(key);
    return it == terms_.end() ? 0.0 : it->second;
  }

  double evaluate(const Assignment& x) const {
    double e = constant_;
    for (const auto& [m, c] : terms_) {
      if (monomial_value(m, x)) e += c;
    }
    return e;
  }

  int degree() const {
    std::size_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.size());
    return static_cast<int>(d);
  }

  bool is_quadratic() const { return degree() <= 2; }

  std::set<VariableId> vars() const {
    std::set<VariableId> out;
    for (const auto& [m, c] : terms_) out.insert(m.begin(), m.end());
    return out;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  double sum_coefficients() const {
    double s = constant_;
    for (const auto& [k, c] : terms_) s += c;
    return s;
  }

  Polynomial& operator+=(const Polynomial& q) {
    constant_ += q.constant_;
    for (const auto& [m, c] : q.terms_) add_canonical(m, c);
    return *this;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  TermMap terms_;
  double constant_ = 0.0;
};

inline Polynomial scale(const Polynomial& p, double s) {
  Polynomial out(p.constant() * s);
  if (s == 0.0) return Polynomial();
  for (const auto& [m, c] : p.terms()) out.add_canonical(m, c * s);
  return out;
}

inline Polynomial add(const Polynomial& p, const Polynomial& q) {
  Polynomial out = p;
  out += q;
  return out;
}

inline Polynomial multiply(const Polynomial& p, const Polynomial& q) {
  Polynomial out(p.constant() * q.constant());
  for (const auto& [m, c] : q.terms()) out.add_canonical(m, p.constant() * c);
  for (const auto& [m, c] : p.terms()) {
    out.add_canonical(m, c * q.constant());
    for (const auto& [n, d] : q.terms()) out.add_canonical(monomial_product(m, n), c * d);
  }
  return out;
}

struct Normalized {
  Polynomial poly;
  double factor = 1.0;  ///< original = poly * factor
};

/// Divides by the largest absolute coefficient.
inline Normalized normalize(const Polynomial& p) {
  const double m = p.max_abs_coeff();
  if (m == 0.0) throw Error(ErrorKind::kEmpty, "cannot normalize a polynomial with no terms");
  return {scale(p, 1.0 / m), m};
}

using LinearTerms = std::vector<std::pair<Monomial, double>>;

/// Multilinear expansion of (constant + sum_k coeff_k * term_k)^2, with each
/// term_k an arbitrary product; squares collapse by idempotence.
inline Polynomial expand_squared_linear(double constant, const LinearTerms& lin) {
  Polynomial out(constant * constant);
  for (std::size_t k = 0; k < lin.size(); ++k) {
    const auto& [tk, ak] = lin[k];
    out.add_canonical(tk, 2.0 * constant * ak + ak * ak);
    for (std::size_t l = k + 1; l < lin.size(); ++l) {
      const auto& [tl, al] = lin[l];
      out.add_canonical(monomial_product(tk, tl), 2.0 * ak * al);
    }
  }
  return out;
}

/// weight * (constant + sum coeff_k * term_k)^2, kept unexpanded.
struct SquaredBlock {
  double weight = 1.0;
  double constant = 0.0;
  LinearTerms terms;

  double evaluate(const Assignment& x) const {
    double s = constant;
    for (const auto& [m, c] : terms) {
      if (monomial_value(m, x)) s += c;
    }
    return weight * s * s;
  }
};

/// A polynomial held as plain terms plus squared-linear blocks. Penalties
/// such as (1 - sum of all full plans)^2 expand quadratically in the number
/// of plans; this form evaluates and anneals them without expansion.
class StructuredPolynomial {
 public:
  StructuredPolynomial() = default;
  StructuredPolynomial(Polynomial plain) : plain_(std::move(plain)) {}  // NOLINT

  Polynomial& plain() { return plain_; }
  const Polynomial& plain() const { return plain_; }
  const std::vector<SquaredBlock>& blocks() const { return blocks_; }

  StructuredPolynomial& add_block(SquaredBlock b) {
    blocks_.push_back(std::move(b));
    return *this;
  }

  StructuredPolynomial& operator+=(const StructuredPolynomial& q) {
    plain_ += q.plain_;
    blocks_.insert(blocks_.end(), q.blocks_.begin(), q.blocks_.end());
    return *this;
  }

  double evaluate(const Assignment& x) const {
    double e = plain_.evaluate(x);
    for (const auto& b : blocks_) e += b.evaluate(x);
    return e;
  }

  std::set<VariableId> vars() const {
    std::set<VariableId> out = plain_.vars();
    for (const auto& b : blocks_)
      for (const auto& [m, c] : b.terms) out.insert(m.begin(), m.end());
    return out;
  }

  /// Number of terms the expanded form would have at most.
  std::size_t expanded_size_bound() const {
    std::size_t n = plain_.size();
    for (const auto& b : blocks_) n += b.terms.size() * (b.terms.size() + 1) / 2;
    return n;
  }

  Polynomial expand() const {
    Polynomial out = plain_;
    for (const auto& b : blocks_) out += scale(expand_squared_linear(b.constant, b.terms), b.weight);
    return out;
  }

 private:
  Polynomial plain_;
  std::vector<SquaredBlock> blocks_;
};

inline StructuredPolynomial scale(const StructuredPolynomial& p, double s) {
  StructuredPolynomial out(scale(p.plain(), s));
  for (SquaredBlock b : p.blocks()) {
    b.weight *= s;
    out.add_block(std::move(b));
  }
  return out;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Text dump: `#` header lines, then one `coeff<TAB>var1,var2,...` line per
/// term in canonical order. The constant is a line with an empty variable list.
inline std::string to_text(const Polynomial& p, std::string_view title = "polynomial") {
  std::string out;
  out += "# ";
  out += title;
  out += "\n# terms " + std::to_string(p.size()) + "\n";
  out += "# degree " + std::to_string(p.degree()) + "\n";
  if (p.constant() != 0.0) out += detail::format_double(p.constant()) + "\t\n";
  for (const auto& [m, c] : p.terms()) {
    out += detail::format_double(c);
    out += '\t';
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) out += ',';
      out += m[i].name();
    }
    out += '\n';
  }
  return out;
}

inline Polynomial polynomial_from_text(std::string_view text) {
  Polynomial p;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::kMalformed, "line " + std::to_string(lineno) + ": missing tab");
    }
    double coeff = 0.0;
    try {
      std::size_t used = 0;
      coeff = std::stod(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kMalformed, "line " + std::to_string(lineno) + ": bad coefficient");
    }
    std::vector<VariableId> vars;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      vars.push_back(VariableId::parse(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    p.add_term(std::move(vars), coeff);
  }
  return p;
}

}  // namespace hubojoin
