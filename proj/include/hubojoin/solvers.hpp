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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubojoin/detail/compiled_objective.hpp"
#include "hubojoin/error.hpp"
#include "hubojoin/formulation.hpp"
#include "hubojoin/join_tree.hpp"
#include "hubojoin/polynomial.hpp"
#include "hubojoin/quadratization.hpp"
#include "hubojoin/random.hpp"

namespace hubojoin {

struct SolveStats {
  long long evaluations = 0;
  long long sweeps = 0;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

struct SolveResult {
  Assignment assignment;
  double energy = 0.0;
  bool feasible = false;
  std::optional<JoinTree> decoded;
  /// Cost of the decoded plan in original units.
  std::optional<double> true_cost;
  SolveStats stats;
  /// Set by the QUBO path when an auxiliary disagrees with its product.
  bool aux_inconsistent = false;
};

enum class BetaCurve { kLinear, kGeometric };

struct AnnealParams {
  /// Full sweeps (|vars| proposals each) per read; 0 selects 1000 * |vars|.
  long long sweeps = 0;
  int reads = 20;
  double beta_min = 0.1;
  double beta_max = 50.0;
  BetaCurve curve = BetaCurve::kGeometric;
  std::uint64_t seed = 0;
};

struct ExactOptions {
  int max_vars = 26;
};

struct PlanOracleOptions {
  long long budget = 10'000'000;
  /// Visit every plan (for counting); no bound pruning.
  bool prune = true;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline bool near(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Lexicographic bit-string order, variable 0 first.
inline bool bits_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  return a < b;
}

inline bool better(double e, const std::vector<std::uint8_t>& s, double best,
                   const std::vector<std::uint8_t>& best_s) {
  if (near(e, best)) return bits_less(s, best_s);
  return e < best;
}

inline double beta_at(const AnnealParams& p, long long k, long long total) {
  if (total <= 1) return p.beta_max;
  const double f = static_cast<double>(k) / static_cast<double>(total - 1);
  if (p.curve == BetaCurve::kLinear) return p.beta_min + f * (p.beta_max - p.beta_min);
  return p.beta_min * std::pow(p.beta_max / p.beta_min, f);
}

}  // namespace detail

/// Global minimum by exhaustive Gray-code enumeration. Ties (within 1e-9
/// relative) go to the lexicographically smallest bit-string.
inline SolveResult solve_exact(const StructuredPolynomial& p, const std::vector<VariableId>& extra = {},
                               ExactOptions opts = {}) {
  const auto start = detail::Clock::now();
  detail::CompiledObjective obj(p, extra);
  const int n = obj.size();
  if (n > opts.max_vars) {
    throw Error(ErrorKind::kTooManyVariables,
                std::to_string(n) + " variables exceed the exact-search cap of " +
                    std::to_string(opts.max_vars));
  }
  std::vector<std::uint8_t> best = obj.state();
  double best_e = obj.energy();
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    obj.flip(std::countr_zero(k));
    if (detail::better(obj.energy(), obj.state(), best_e, best)) {
      best_e = obj.energy();
      best = obj.state();
    }
  }
  SolveResult r;
  r.assignment = detail::to_assignment(obj.vars(), best);
  r.energy = p.evaluate(r.assignment);
  r.stats.evaluations = static_cast<long long>(total);
  r.stats.wall_time_ms = detail::elapsed_ms(start);
  return r;
}

inline SolveResult solve_exact(const Polynomial& p, ExactOptions opts = {}) {
  return solve_exact(StructuredPolynomial(p), {}, opts);
}

/// Single-bit-flip Metropolis annealing with `reads` restarts; read i uses
/// seed + i. The best state seen in any read is returned.
inline SolveResult solve_sa(const StructuredPolynomial& p, const AnnealParams& params,
                            const std::vector<VariableId>& extra = {}) {
  if (params.reads < 1) throw Error(ErrorKind::kInvalidArgument, "reads must be >= 1");
  if (params.sweeps < 0) throw Error(ErrorKind::kInvalidArgument, "sweeps must be >= 0");
  if (!(params.beta_min > 0.0) || params.beta_max < params.beta_min) {
    throw Error(ErrorKind::kInvalidArgument, "need 0 < beta_min <= beta_max");
  }
  const auto start = detail::Clock::now();
  detail::CompiledObjective obj(p, extra);
  const int n = obj.size();
  const long long sweeps = params.sweeps > 0 ? params.sweeps : 1000LL * std::max(n, 1);

  std::vector<std::uint8_t> best;
  double best_e = std::numeric_limits<double>::infinity();
  long long evaluations = 0;
  for (int read = 0; read < params.reads; ++read) {
    Rng rng(params.seed + static_cast<std::uint64_t>(read));
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next() >> 63);
    obj.reset(bits);
    std::vector<std::uint8_t> read_best = obj.state();
    double read_e = obj.energy();
    for (long long s = 0; s < sweeps && n > 0; ++s) {
      const double beta = detail::beta_at(params, s, sweeps);
      for (int k = 0; k < n; ++k) {
        const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const double d = obj.delta(v);
        ++evaluations;
        if (d <= 0.0 || rng.uniform01() < std::exp(-beta * d)) {
          obj.flip(v, d);
          if (obj.energy() < read_e) {
            read_e = obj.energy();
            read_best = obj.state();
          }
        }
      }
    }
    // Re-anchor against accumulated drift before comparing reads.
    obj.reset(read_best);
    read_e = obj.energy();
    if (best.empty() || detail::better(read_e, read_best, best_e, best)) {
      best_e = read_e;
      best = read_best;
    }
  }
  SolveResult r;
  r.assignment = detail::to_assignment(obj.vars(), best);
  r.energy = p.evaluate(r.assignment);
  r.stats.evaluations = evaluations;
  r.stats.sweeps = sweeps;
  r.stats.seed = params.seed;
  r.stats.wall_time_ms = detail::elapsed_ms(start);
  return r;
}

inline SolveResult solve_sa(const Polynomial& p, const AnnealParams& params) {
  return solve_sa(StructuredPolynomial(p), params);
}

/// Quadratizes, anneals the QUBO, lifts, and reports energy against `p`.
inline SolveResult solve_via_qubo(const Polynomial& p, ReductionMethod method,
                                  const AnnealParams& params,
                                  const std::vector<VariableId>& extra = {}) {
  const auto start = detail::Clock::now();
  const Reduction red = reduce(p, method);
  SolveResult r = solve_sa(StructuredPolynomial(red.qubo), params, extra);
  const Lifted lifted = lift(r.assignment, red.map);
  r.assignment = lifted.assignment;
  for (const auto& v : p.vars()) r.assignment.emplace(v, false);  // vars reduced away entirely
  r.aux_inconsistent = lifted.aux_inconsistent;
  r.energy = p.evaluate(r.assignment);
  r.stats.wall_time_ms = detail::elapsed_ms(start);
  return r;
}

/// Minimum-energy encoding of an adherent left-deep order, found by
/// depth-first search over orders with order[0] < order[1].
///
/// A prefix contributes its cost term when the problem has it; a plan whose
/// chain of terms breaks is charged the penalty C once. Both parts only grow
/// along a branch, which makes the running sum a valid bound.
inline SolveResult solve_plan_oracle(const QueryGraph& g, const Problem& p,
                                     PlanOracleOptions opts = {}) {
  const auto start = detail::Clock::now();
  const int n = g.size();
  const bool dependent = p.method != Method::kPrecise2;
  std::vector<RelationId> order, best_order;
  std::vector<VariableId> chain;
  double best = std::numeric_limits<double>::infinity();
  long long plans = 0;

  struct Child {
    RelationId t;
    VariableId x;
    double coeff;
  };
  auto rec = [&](auto&& self, RelationSet joined, double bound, bool alive) -> void {
    const int depth = static_cast<int>(order.size());
    if (depth == n) {
      if (++plans > opts.budget) {
        throw Error(ErrorKind::kBudgetExceeded, "plan enumeration budget exceeded");
      }
      if (bound < best) {
        best = bound;
        best_order = order;
      }
      return;
    }
    std::vector<Child> kids;
    for (RelationId t = 0; t < n; ++t) {
      if (contains(joined, t)) continue;
      if (depth == 1 && t < order[0]) continue;
      if (depth >= 1 && (g.neighbors(t) & joined) == 0) continue;
      Child c{t, VariableId(), 0.0};
      if (depth >= 1) {
        // Same edge choice as plan_edges.
        const RelationId prev = order.back();
        int k = g.has_edge(prev, t) ? g.edge_index(prev, t) : -1;
        if (k < 0) k = g.edge_index(std::countr_zero(g.neighbors(t) & joined), t);
        const auto& e = g.edges()[k];
        c.x = VariableId::join(e.u, e.v, depth - 1);
        if (alive) {
          Monomial m = chain;
          m.push_back(c.x);
          c.coeff = p.cost.coefficient(m);
        }
      }
      kids.push_back(c);
    }
    std::stable_sort(kids.begin(), kids.end(), [&](const Child& a, const Child& b) {
      const bool ha = a.coeff > 0.0, hb = b.coeff > 0.0;
      if (ha != hb) return ha;
      return a.coeff < b.coeff;
    });
    for (const auto& c : kids) {
      double next = bound;
      bool still = alive;
      if (depth >= 1) {
        if (alive && c.coeff > 0.0) {
          next += c.coeff;
        } else {
          still = false;
          if (alive && dependent) next += p.penalty_C;
        }
        if (opts.prune && next > best) continue;
        chain.push_back(c.x);
      }
      order.push_back(c.t);
      self(self, joined | singleton(c.t), next, still);
      order.pop_back();
      if (depth >= 1) chain.pop_back();
    }
  };
  rec(rec, 0, 0.0, true);

  SolveResult r;
  r.stats.evaluations = plans;
  if (best_order.empty()) throw Error(ErrorKind::kInfeasible, "no adherent plan");
  r.assignment = encode(best_order, p);
  r.energy = p.full().evaluate(r.assignment);
  if (!detail::near(r.energy, best)) {
    throw Error(ErrorKind::kInvariant, "plan oracle energy disagrees with the problem polynomial");
  }
  r.feasible = true;
  r.decoded = leftdeep_from_order(best_order);
  r.true_cost = cost(*r.decoded, g);
  r.stats.wall_time_ms = detail::elapsed_ms(start);
  return r;
}

enum class SolverKind { kExact, kPlanOracle, kSa, kSaQubo };

inline std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::kExact: return "exact";
    case SolverKind::kPlanOracle: return "plan_oracle";
    case SolverKind::kSa: return "sa";
    case SolverKind::kSaQubo: return "sa_qubo";
  }
  return "";
}

inline SolverKind parse_solver(std::string_view s) {
  for (auto k : {SolverKind::kExact, SolverKind::kPlanOracle, SolverKind::kSa, SolverKind::kSaQubo}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown solver '" + std::string(s) + "'");
}

struct SolveOptions {
  AnnealParams anneal;
  ExactOptions exact;
  PlanOracleOptions oracle;
  ReductionMethod reduction = ReductionMethod::kMixed;
  DecodeMode decode = DecodeMode::kLenient;
};

/// Fills feasibility, decoded tree and true cost from the assignment.
inline void attach_plan(SolveResult& r, const Problem& p, DecodeMode mode) {
  try {
    r.decoded = decode(r.assignment, p, mode);
    r.feasible = true;
    r.true_cost = cost(*r.decoded, p.graph);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kInfeasible) throw;
    r.feasible = false;
    r.decoded.reset();
    r.true_cost.reset();
  }
}

/// Runs `solver` on the problem's full polynomial and decodes the result.
inline SolveResult solve_problem(const Problem& p, SolverKind solver, const SolveOptions& o = {}) {
  SolveResult r;
  switch (solver) {
    case SolverKind::kPlanOracle:
      return solve_plan_oracle(p.graph, p, o.oracle);
    case SolverKind::kExact:
      r = solve_exact(p.full(), p.variables(), o.exact);
      break;
    case SolverKind::kSa:
      r = solve_sa(p.full(), o.anneal, p.variables());
      break;
    case SolverKind::kSaQubo: {
      r = solve_via_qubo(p.full().expand(), o.reduction, o.anneal, p.variables());
      break;
    }
  }
  attach_plan(r, p, o.decode);
  return r;
}

}  // namespace hubojoin
