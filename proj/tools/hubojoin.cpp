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

// Command-line front end: generate graphs, formulate and reduce problems,
// solve, run baselines, and drive benchmark grids.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hubojoin/hubojoin.hpp"

namespace {

using namespace hubojoin;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string read_input(const std::string& path) {
  if (!path.empty() && path != "-") return read_file(path);
  std::ostringstream s;
  s << std::cin.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path + "'");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformed, what + ": " + e.what());
  }
}

// "3-7" or "3,5,8" or a mix.
std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        for (int n = lo; n <= hi; ++n) out.push_back(n);
      }
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--sizes", "bad size list '" + text + "'");
    }
  }
  return out;
}

json plan_json(const Plan& p) {
  return {{"order", p.order}, {"tree", p.tree.to_string()}, {"cost", p.cost}};
}

json result_json(const SolveResult& r) {
  json active = json::array();
  for (const auto& [v, b] : r.assignment)
    if (b) active.push_back(v.name());
  json j = {{"energy", r.energy},
            {"feasible", r.feasible},
            {"active", active},
            {"stats",
             {{"evaluations", r.stats.evaluations},
              {"sweeps", r.stats.sweeps},
              {"seed", r.stats.seed},
              {"wall_time_ms", r.stats.wall_time_ms}}}};
  if (r.decoded) {
    j["order"] = r.decoded->leaves();
    j["tree"] = r.decoded->to_string();
  }
  if (r.true_cost) j["true_cost"] = *r.true_cost;
  if (r.aux_inconsistent) j["aux_inconsistent"] = true;
  return j;
}

struct AnnealFlags {
  long long sweeps = 0;
  int reads = 20;
  double beta_min = 0.1;
  double beta_max = 50.0;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--sweeps", sweeps, "Sweeps per read (0: 1000 * variables)");
    app->add_option("--reads", reads, "Independent annealing restarts");
    app->add_option("--beta-min", beta_min, "Initial inverse temperature");
    app->add_option("--beta-max", beta_max, "Final inverse temperature");
    app->add_option("--seed", seed, "Annealing seed");
  }
  AnnealParams params() const {
    AnnealParams p;
    p.sweeps = sweeps;
    p.reads = reads;
    p.beta_min = beta_min;
    p.beta_max = beta_max;
    p.seed = seed;
    return p;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"HUBO join-order formulation, solvers and baselines"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random query graph as JSON");
  std::string gen_shape, gen_out;
  int gen_n = 0;
  std::uint64_t gen_seed = 0;
  double card_lo = 10.0, card_hi = 50.0;
  bool placeholder = false;
  gen->add_option("--shape", gen_shape, "chain, star, cycle, tree or clique")->required();
  gen->add_option("--n", gen_n, "Number of relations")->required();
  gen->add_option("--seed", gen_seed, "Seed for topology and statistics");
  gen->add_option("--card-lo", card_lo, "Smallest cardinality");
  gen->add_option("--card-hi", card_hi, "Largest cardinality");
  gen->add_flag("--placeholder", placeholder, "Keep cardinality and selectivity 1");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // formulate
  auto* form = app.add_subcommand("formulate", "Build a HUBO problem from a graph");
  std::string form_graph, form_method = "precise1", form_out;
  int form_hn = 1;
  form->add_option("--graph", form_graph, "Graph JSON (default stdin)");
  form->add_option("--method", form_method, "precise1, precise2 or heuristic");
  form->add_option("--heuristic-n", form_hn, "Table sets kept per rank (heuristic)");
  form->add_option("--out", form_out, "Write <out>.hubo and <out>.json");

  // reduce
  auto* red = app.add_subcommand("reduce", "Quadratize a problem into a QUBO coordinate file");
  std::string red_problem, red_hubo, red_method = "mixed", red_out;
  red->add_option("--problem", red_problem, "Problem sidecar JSON written by formulate");
  red->add_option("--hubo", red_hubo, "Polynomial text file");
  red->add_option("--method", red_method, "min-selection, substitution or mixed");
  red->add_option("--out", red_out, "Output file (default stdout)");

  // solve
  auto* sol = app.add_subcommand("solve", "Solve a problem and decode the join order");
  std::string sol_problem, sol_solver = "plan_oracle", sol_reduction = "mixed", sol_out;
  bool sol_strict = false;
  AnnealFlags sol_anneal;
  sol->add_option("--problem", sol_problem, "Problem sidecar JSON written by formulate")->required();
  sol->add_option("--solver", sol_solver, "exact, plan_oracle, sa or sa_qubo");
  sol->add_option("--reduction", sol_reduction, "Reduction for sa_qubo");
  sol->add_flag("--strict", sol_strict, "Reject assignments that are not exact plan encodings");
  sol->add_option("--out", sol_out, "Output file (default stdout)");
  sol_anneal.attach(sol);

  // baseline
  auto* base = app.add_subcommand("baseline", "Dynamic-programming and greedy plans");
  std::string base_graph;
  base->add_option("--graph", base_graph, "Graph JSON (default stdin)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment grid and write CSV");
  std::string bench_config, bench_shapes, bench_sizes, bench_method = "precise1",
                                                      bench_solver = "plan_oracle", bench_out;
  int bench_instances = 20, bench_hn = 1;
  std::uint64_t bench_seed = 0;
  AnnealFlags bench_anneal;
  bench->add_option("--config", bench_config, "Experiment config JSON");
  bench->add_option("--shapes", bench_shapes, "Comma-separated shapes");
  bench->add_option("--sizes", bench_sizes, "Sizes, e.g. 3-7 or 3,5,8");
  bench->add_option("--method", bench_method, "precise1, precise2 or heuristic");
  bench->add_option("--solver", bench_solver, "exact, plan_oracle, sa or sa_qubo");
  bench->add_option("--instances", bench_instances, "Instances per cell");
  bench->add_option("--heuristic-n", bench_hn, "Table sets kept per rank (heuristic)");
  bench->add_option("--base-seed", bench_seed, "Seed all instance seeds derive from");
  bench->add_option("--out", bench_out, "Output CSV (default stdout)");
  bench_anneal.attach(bench);

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Relative-cost series from a results CSV");
  std::string plot_csv, plot_out;
  plot->add_option("--csv", plot_csv, "Results CSV (default stdin)");
  plot->add_option("--out", plot_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      QueryGraph g = generate_shape(parse_shape(gen_shape), gen_n, gen_seed);
      if (!placeholder) g = sample_statistics(g, card_lo, card_hi, mix_seed(gen_seed, 1));
      write_output(gen_out, save_json(g));
    } else if (form->parsed()) {
      const QueryGraph g = load_json(read_input(form_graph));
      const Problem p = build_problem(g, parse_method(form_method), form_hn);
      if (!form_out.empty()) {
        write_output(form_out + ".hubo", to_text(p.full().expand(), "hubojoin problem"));
        write_output(form_out + ".json", problem_sidecar(p).dump(2) + "\n");
      }
      std::cout << "variables " << p.variables().size() << "\n";
      std::cout << "penalty_C " << detail::format_double(p.penalty_C) << "\n";
      std::cout << "cost_scale " << detail::format_double(p.cost_scale) << "\n";
    } else if (red->parsed()) {
      if (red_problem.empty() == red_hubo.empty()) {
        std::cerr << "reduce: give exactly one of --problem or --hubo\n";
        return 1;
      }
      const Polynomial source =
          red_hubo.empty()
              ? problem_from_sidecar(parse_json(read_file(red_problem), red_problem)).full().expand()
              : polynomial_from_text(read_file(red_hubo));
      const Reduction r = reduce(source, parse_reduction_method(red_method));
      write_output(red_out, to_qubo_text(r.qubo));
    } else if (sol->parsed()) {
      const Problem p = problem_from_sidecar(parse_json(read_file(sol_problem), sol_problem));
      SolveOptions o;
      o.anneal = sol_anneal.params();
      o.reduction = parse_reduction_method(sol_reduction);
      o.decode = sol_strict ? DecodeMode::kStrict : DecodeMode::kLenient;
      const SolveResult r = solve_problem(p, parse_solver(sol_solver), o);
      json j = result_json(r);
      j["cost_scale"] = p.cost_scale;
      write_output(sol_out, j.dump(2) + "\n");
    } else if (base->parsed()) {
      const QueryGraph g = load_json(read_input(base_graph));
      json j = {{"dp_without_cross", plan_json(dp_without_cross(g))},
                {"greedy_without_cross", plan_json(greedy_without_cross(g))}};
      if (g.size() <= kDpMaxRelations) j["dp_with_cross"] = plan_json(dp_with_cross(g));
      std::cout << j.dump(2) << "\n";
    } else if (bench->parsed()) {
      ExperimentConfig cfg;
      if (!bench_config.empty()) {
        cfg = experiment_config_from_json(parse_json(read_file(bench_config), bench_config));
      } else {
        if (bench_shapes.empty() || bench_sizes.empty()) {
          std::cerr << "bench: give --config, or --shapes and --sizes\n";
          return 1;
        }
        std::istringstream in(bench_shapes);
        std::string s;
        while (std::getline(in, s, ',')) cfg.shapes.push_back(parse_shape(s));
        cfg.sizes = parse_sizes(bench_sizes);
        cfg.method = parse_method(bench_method);
        cfg.solver = parse_solver(bench_solver);
        cfg.instances_per_cell = bench_instances;
        cfg.heuristic_n = bench_hn;
        cfg.base_seed = bench_seed;
        cfg.anneal = bench_anneal.params();
      }
      write_output(bench_out, to_csv(run_experiment(cfg)));
    } else if (plot->parsed()) {
      write_output(plot_out, plot_data(read_input(plot_csv)));
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::kInvalidArgument ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
