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
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubojoin/baselines.hpp"
#include "hubojoin/error.hpp"
#include "hubojoin/formulation.hpp"
#include "hubojoin/polynomial.hpp"
#include "hubojoin/query_graph.hpp"
#include "hubojoin/random.hpp"
#include "hubojoin/solvers.hpp"

namespace hubojoin {

struct ExperimentConfig {
  std::vector<Shape> shapes;
  std::vector<int> sizes;
  int instances_per_cell = 20;
  Method method = Method::kPrecise1;
  SolverKind solver = SolverKind::kPlanOracle;
  int heuristic_n = 1;
  double card_lo = 10.0;
  double card_hi = 50.0;
  std::uint64_t base_seed = 0;
  AnnealParams anneal;
  DecodeMode decode = DecodeMode::kLenient;
  /// Cells whose expanded polynomial would exceed this many terms are
  /// skipped by the QUBO solver.
  std::size_t qubo_term_cap = 2'000'000;

  void validate() const {
    if (shapes.empty()) throw Error(ErrorKind::kInvalidArgument, "config needs at least one shape");
    if (sizes.empty()) throw Error(ErrorKind::kInvalidArgument, "config needs at least one size");
    for (int n : sizes)
      if (n < 2) throw Error(ErrorKind::kInvalidArgument, "sizes must be >= 2");
    if (instances_per_cell < 1) throw Error(ErrorKind::kInvalidArgument, "instances_per_cell must be >= 1");
    if (heuristic_n < 1) throw Error(ErrorKind::kInvalidArgument, "heuristic_n must be >= 1");
    if (!(card_lo >= 1.0) || card_hi < card_lo) {
      throw Error(ErrorKind::kInvalidArgument, "card_range must satisfy 1 <= lo <= hi");
    }
  }
};

inline std::string_view to_string(BetaCurve c) {
  return c == BetaCurve::kLinear ? "linear" : "geometric";
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json shapes = nlohmann::json::array();
  for (Shape s : c.shapes) shapes.push_back(std::string(to_string(s)));
  return {{"shapes", shapes},
          {"sizes", c.sizes},
          {"instances_per_cell", c.instances_per_cell},
          {"method", to_string(c.method)},
          {"solver", to_string(c.solver)},
          {"heuristic_n", c.heuristic_n},
          {"card_range", {c.card_lo, c.card_hi}},
          {"base_seed", c.base_seed},
          {"decode", c.decode == DecodeMode::kLenient ? "lenient" : "strict"},
          {"anneal",
           {{"sweeps", c.anneal.sweeps},
            {"reads", c.anneal.reads},
            {"beta_min", c.anneal.beta_min},
            {"beta_max", c.anneal.beta_max},
            {"curve", to_string(c.anneal.curve)},
            {"seed", c.anneal.seed}}}};
}

/// Reads a config; absent keys keep their defaults.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    for (const auto& s : j.at("shapes")) c.shapes.push_back(parse_shape(s.get<std::string>()));
    c.sizes = j.at("sizes").get<std::vector<int>>();
    c.instances_per_cell = j.value("instances_per_cell", c.instances_per_cell);
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    if (j.contains("solver")) c.solver = parse_solver(j["solver"].get<std::string>());
    c.heuristic_n = j.value("heuristic_n", c.heuristic_n);
    if (j.contains("card_range")) {
      const auto r = j["card_range"].get<std::vector<double>>();
      if (r.size() != 2) throw Error(ErrorKind::kMalformed, "card_range needs two values");
      c.card_lo = r[0];
      c.card_hi = r[1];
    }
    c.base_seed = j.value("base_seed", c.base_seed);
    if (j.contains("decode")) {
      const auto d = j["decode"].get<std::string>();
      if (d != "lenient" && d != "strict") throw Error(ErrorKind::kMalformed, "decode must be lenient or strict");
      c.decode = d == "lenient" ? DecodeMode::kLenient : DecodeMode::kStrict;
    }
    if (j.contains("anneal")) {
      const auto& a = j["anneal"];
      c.anneal.sweeps = a.value("sweeps", c.anneal.sweeps);
      c.anneal.reads = a.value("reads", c.anneal.reads);
      c.anneal.beta_min = a.value("beta_min", c.anneal.beta_min);
      c.anneal.beta_max = a.value("beta_max", c.anneal.beta_max);
      c.anneal.seed = a.value("seed", c.anneal.seed);
      const std::string curve = a.value("curve", std::string("geometric"));
      if (curve != "linear" && curve != "geometric") throw Error(ErrorKind::kMalformed, "bad beta curve");
      c.anneal.curve = curve == "linear" ? BetaCurve::kLinear : BetaCurve::kGeometric;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformed, std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

enum class RowStatus { kFeasible, kInfeasible, kSkipped };

struct ResultRow {
  Shape shape = Shape::kChain;
  int n = 0;
  /// Empty on per-cell aggregate rows.
  std::optional<std::uint64_t> instance_seed;
  Method method = Method::kPrecise1;
  SolverKind solver = SolverKind::kPlanOracle;
  RowStatus status = RowStatus::kSkipped;
  std::optional<double> true_cost;
  std::optional<double> dp_cross_cost;
  std::optional<double> dp_nocross_cost;
  std::optional<double> greedy_cost;
  std::optional<double> rel_to_dp_cross;
  double wall_time_ms = 0.0;
  long long variable_count = 0;

  bool is_aggregate() const { return !instance_seed.has_value(); }
};

inline std::uint64_t instance_seed(std::uint64_t base, Shape shape, int n, int index) {
  std::uint64_t h = mix_seed(base, hash_string(to_string(shape)));
  h = mix_seed(h, static_cast<std::uint64_t>(n));
  return mix_seed(h, static_cast<std::uint64_t>(index));
}

/// The query graph an experiment cell uses for one instance.
inline QueryGraph instance_graph(Shape shape, int n, std::uint64_t seed, double lo, double hi) {
  return sample_statistics(generate_shape(shape, n, seed), lo, hi, mix_seed(seed, 1));
}

namespace detail {

inline std::optional<double> try_plan_cost(Plan (*f)(const QueryGraph&), const QueryGraph& g) {
  try {
    return f(g).cost;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSizeCap) return std::nullopt;
    throw;
  }
}

inline std::optional<double> reference_cost(const ResultRow& r) {
  return r.dp_cross_cost ? r.dp_cross_cost : r.dp_nocross_cost;
}

inline ResultRow run_instance(const ExperimentConfig& cfg, Shape shape, int n, int index) {
  const auto start = Clock::now();
  ResultRow row;
  row.shape = shape;
  row.n = n;
  row.method = cfg.method;
  row.solver = cfg.solver;
  const std::uint64_t seed = instance_seed(cfg.base_seed, shape, n, index);
  row.instance_seed = seed;
  if (shape == Shape::kCycle && n < 3) return row;
  const QueryGraph g = instance_graph(shape, n, seed, cfg.card_lo, cfg.card_hi);
  row.variable_count = variable_count(g, cfg.method);
  row.dp_cross_cost = n <= kDpMaxRelations ? std::optional<double>(dp_with_cross(g).cost) : std::nullopt;
  row.dp_nocross_cost = try_plan_cost(&dp_without_cross, g);
  row.greedy_cost = greedy_without_cross(g).cost;

  const bool exact_too_big =
      cfg.solver == SolverKind::kExact && row.variable_count > SolveOptions{}.exact.max_vars;
  if (!exact_too_big) {
    try {
      const Problem p = build_problem(g, cfg.method, cfg.heuristic_n);
      if (cfg.solver == SolverKind::kSaQubo && p.full().expanded_size_bound() > cfg.qubo_term_cap) {
        throw Error(ErrorKind::kSizeCap, "expanded polynomial too large");
      }
      SolveOptions opts;
      opts.anneal = cfg.anneal;
      opts.anneal.seed = mix_seed(cfg.anneal.seed, seed);
      opts.decode = cfg.decode;
      const SolveResult r = solve_problem(p, cfg.solver, opts);
      row.status = r.feasible ? RowStatus::kFeasible : RowStatus::kInfeasible;
      row.true_cost = r.true_cost;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kBudgetExceeded && e.kind() != ErrorKind::kSizeCap &&
          e.kind() != ErrorKind::kTooManyVariables) {
        throw;
      }
      row.status = RowStatus::kSkipped;
    }
  }
  if (row.true_cost && reference_cost(row)) row.rel_to_dp_cross = *row.true_cost / *reference_cost(row);
  row.wall_time_ms = elapsed_ms(start);
  return row;
}

inline void add_to(std::optional<double>& sum, const std::optional<double>& v) {
  if (v) sum = sum.value_or(0.0) + *v;
}

// Cumulative row over the instances that produced a plan.
inline ResultRow aggregate(const std::vector<ResultRow>& cell) {
  ResultRow agg = cell.front();
  agg.instance_seed.reset();
  agg.true_cost = agg.dp_cross_cost = agg.dp_nocross_cost = agg.greedy_cost = std::nullopt;
  agg.rel_to_dp_cross.reset();
  agg.wall_time_ms = 0.0;
  agg.variable_count = 0;
  bool any_run = false, all_feasible = true;
  bool cross_everywhere = true;
  for (const auto& r : cell) {
    agg.wall_time_ms += r.wall_time_ms;
    agg.variable_count += r.variable_count;
    if (r.status == RowStatus::kSkipped) continue;
    any_run = true;
    if (r.status != RowStatus::kFeasible) {
      all_feasible = false;
      continue;
    }
    add_to(agg.true_cost, r.true_cost);
    add_to(agg.dp_cross_cost, r.dp_cross_cost);
    add_to(agg.dp_nocross_cost, r.dp_nocross_cost);
    add_to(agg.greedy_cost, r.greedy_cost);
    cross_everywhere = cross_everywhere && r.dp_cross_cost.has_value();
  }
  if (!cross_everywhere) agg.dp_cross_cost.reset();
  agg.status = !any_run ? RowStatus::kSkipped
                        : (all_feasible ? RowStatus::kFeasible : RowStatus::kInfeasible);
  if (agg.true_cost && reference_cost(agg)) agg.rel_to_dp_cross = *agg.true_cost / *reference_cost(agg);
  return agg;
}

}  // namespace detail

/// Runs every (shape, n, instance) of the grid. Rows come sorted by shape
/// name, then n, then instance index; each cell ends with its aggregate row.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Shape> shapes = cfg.shapes;
  std::sort(shapes.begin(), shapes.end(),
            [](Shape a, Shape b) { return to_string(a) < to_string(b); });
  shapes.erase(std::unique(shapes.begin(), shapes.end()), shapes.end());
  std::vector<int> sizes = cfg.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<ResultRow> rows;
  for (Shape shape : shapes) {
    for (int n : sizes) {
      std::vector<ResultRow> cell;
      for (int i = 0; i < cfg.instances_per_cell; ++i) cell.push_back(detail::run_instance(cfg, shape, n, i));
      rows.insert(rows.end(), cell.begin(), cell.end());
      rows.push_back(detail::aggregate(cell));
    }
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "shape,n,instance_seed,method,solver,feasible,true_cost,dp_cross_cost,dp_nocross_cost,"
    "greedy_cost,rel_to_dp_cross,wall_time_ms,variable_count";

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  auto num = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    const char* status = r.status == RowStatus::kFeasible
                             ? "true"
                             : (r.status == RowStatus::kInfeasible ? "false" : "skipped");
    out << to_string(r.shape) << ',' << r.n << ','
        << (r.instance_seed ? std::to_string(*r.instance_seed) : std::string("ALL")) << ','
        << to_string(r.method) << ',' << to_string(r.solver) << ',' << status << ','
        << num(r.true_cost) << ',' << num(r.dp_cross_cost) << ',' << num(r.dp_nocross_cost) << ','
        << num(r.greedy_cost) << ',' << num(r.rel_to_dp_cross) << ','
        << detail::format_double(r.wall_time_ms) << ',' << r.variable_count << "\n";
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error(ErrorKind::kMalformed, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kMalformed, "bad number '" + s + "'");
  }
}

}  // namespace detail

/// Relative-cost series per cell from a results CSV: `shape,n,series,value`
/// with series hubo, dp_nocross and greedy, each a cell sum divided by the
/// cell's dp-with-cross sum (dp-without-cross where that is unavailable).
inline std::string plot_data(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::kMalformed, "results CSV header mismatch");
  }
  std::ostringstream out;
  out << "shape,n,series,value\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 13) throw Error(ErrorKind::kMalformed, "results CSV row has " + std::to_string(f.size()) + " fields");
    if (f[2] != "ALL") continue;
    const auto cross = detail::parse_optional(f[7]);
    const auto nocross = detail::parse_optional(f[8]);
    const auto ref = cross ? cross : nocross;
    if (!ref || *ref == 0.0) continue;
    const std::pair<const char*, std::optional<double>> series[] = {
        {"hubo", detail::parse_optional(f[6])}, {"dp_nocross", nocross}, {"greedy", detail::parse_optional(f[9])}};
    for (const auto& [name, v] : series) {
      if (v) out << f[0] << ',' << f[1] << ',' << name << ',' << detail::format_double(*v / *ref) << "\n";
    }
  }
  return out.str();
}

}  // namespace hubojoin
