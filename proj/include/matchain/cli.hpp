#pragma once

// Command-line front end. run_cli returns the process exit code:
// 0 success, 1 runtime error, 2 usage error, 3 solver limit reached.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matchain/disjunctive.hpp"
#include "matchain/io.hpp"
#include "matchain/thinfilm.hpp"
#include "matchain/timemachine.hpp"

namespace matchain {

namespace detail {

struct CliState {
  bool no_timestamp = false;
  std::string out_csv;

  // thinfilm
  std::string data;
  std::string substrate;
  double lambda = 0.0;
  std::size_t layers = 0;
  std::vector<std::string> materials;
  double tf_gap = 1e-3;
  double target = kInf;
  double time_limit = kInf;
  bool no_symmetry = false;
  bool no_det_cut = false;
  std::string output;

  // atm
  std::string growth;
  std::vector<std::uint64_t> synthetic;  // g K seed
  std::string model = "cpm";
  std::string tie = "strict";
  std::string initial;
  std::string target_genotype;
  std::size_t steps = 0;
  double atm_gap = 1e-3;
  std::string bound = "dp";
  std::size_t budget = 100'000'000;
  unsigned g = 0;
  std::size_t K = 0;
  std::uint64_t seed = 0;

  unsigned threads = 0;
  std::size_t node_limit = 0;
};

inline std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json envelope(const CliState& s, const std::string& command) {
  json j;
  j["command"] = command;
  if (!s.no_timestamp) j["timestamp"] = iso_now();
  return j;
}

// Wall time is a clock reading too; --no-timestamp drops it for byte-stable output.
inline json report_for(const CliState& s, const SolveReport& r) {
  json j = report_json(r);
  if (s.no_timestamp) j.erase("wall_time");
  return j;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

inline MaterialLibrary load_library(const CliState& s) {
  return parse_refractive_csv(s.data).library(s.substrate, s.lambda, s.materials);
}

inline void write_design_csv(const StackDesign& d, const MaterialLibrary& lib, const std::string& path) {
  auto f = open_out(path);
  f << "layer,material,index,thickness_nm,C,S\n";
  char buf[160];
  for (std::size_t n = 0; n < d.layers.size(); ++n) {
    const auto& l = d.layers[n];
    std::snprintf(buf, sizeof buf, "%zu,%s,%.12g,%.12g,%.12g,%.12g\n", n + 1, lib.names[l.material].c_str(),
                  lib.indices[l.material], l.thickness(lib), l.C, l.S);
    f << buf;
  }
}

inline GrowthTable load_growth(const CliState& s) {
  if (!s.growth.empty() && !s.synthetic.empty()) throw CLI::ValidationError("use either --growth or --synthetic");
  if (!s.synthetic.empty()) {
    if (s.synthetic.size() != 3) throw CLI::ValidationError("--synthetic takes g K seed");
    return gen_synthetic(static_cast<unsigned>(s.synthetic[0]), s.synthetic[1], s.synthetic[2]);
  }
  if (s.growth.empty()) throw CLI::ValidationError("one of --growth or --synthetic is required");
  return parse_growth_csv(s.growth);
}

inline std::vector<Eigen::MatrixXd> load_transitions(const CliState& s, const GrowthTable& t) {
  const auto model = s.model == "cpm" ? ProbabilityModel::CPM : ProbabilityModel::EPM;
  return build_transitions(t, model, s.tie == "absorb" ? TieMode::AbsorbResidual : TieMode::Strict);
}

inline std::size_t genotype_or_wild(const GrowthTable& t, const std::string& name) {
  return name.empty() ? 0 : t.space().index(name);
}

inline json sequence_json(const GrowthTable& t, const std::vector<std::size_t>& seq) {
  json a = json::array();
  for (auto k : seq) a.push_back(t.drugs[k]);
  return a;
}

inline void write_sequence_csv(const GrowthTable& t, const std::vector<std::size_t>& seq, const std::string& path) {
  auto f = open_out(path);
  f << "step,drug\n";
  for (std::size_t n = 0; n < seq.size(); ++n) f << n + 1 << ',' << t.drugs[seq[n]] << '\n';
}

inline int limit_code(SolveStatus s) { return s == SolveStatus::NodeLimit || s == SolveStatus::TimeLimit ? 3 : 0; }

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::CliState;
  CliState s;
  CLI::App app{"matchain: optimization over products of matrices (thin films, antibiotic time machine)", "matchain"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--no-timestamp", s.no_timestamp, "Omit timestamp and wall time from JSON output");

  const auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", s.threads, "Worker threads (default: $MATCHAIN_THREADS or 1)");
    c->add_option("--node-limit", s.node_limit, "Stop after this many nodes (0: none)");
  };
  const auto add_library = [&](CLI::App* c) {
    c->add_option("--data", s.data, "Refractive index CSV (material,wavelength_nm,n_real,n_imag)")->required()->check(CLI::ExistingFile);
    c->add_option("--substrate", s.substrate, "Substrate material name")->required();
    c->add_option("--lambda", s.lambda, "Wavelength in nm (exact match)")->required()->check(CLI::PositiveNumber);
    c->add_option("--layers", s.layers, "Number of coating layers")->required();
    c->add_option("--materials", s.materials, "Coating materials (default: all dielectrics at lambda)")->delimiter(',');
  };

  auto* tf = app.add_subcommand("thinfilm", "Multilayer reflector design");
  tf->require_subcommand(1);
  auto* tf_heur = tf->add_subcommand("heuristic", "Quarter-wave stack of the highest and lowest index coatings");
  add_library(tf_heur);
  tf_heur->add_option("--out", s.out_csv, "Write the layer table as CSV");
  auto* tf_solve = tf->add_subcommand("solve", "Global maximization of reflectance");
  add_library(tf_solve);
  tf_solve->add_option("--gap", s.tf_gap, "Relative optimality gap")->check(CLI::NonNegativeNumber);
  tf_solve->add_option("--target", s.target, "Stop once reflectance reaches this value");
  tf_solve->add_option("--time-limit", s.time_limit, "Seconds")->check(CLI::PositiveNumber);
  tf_solve->add_flag("--no-symmetry", s.no_symmetry, "Allow equal adjacent materials");
  tf_solve->add_option("--out", s.out_csv, "Write the layer table as CSV");
  add_threads(tf_solve);
  auto* tf_export = tf->add_subcommand("export", "Write the mixed-integer bilinear model as JSON");
  add_library(tf_export);
  tf_export->add_option("--output", s.output, "Formulation JSON path")->required();
  tf_export->add_flag("--no-det-cut", s.no_det_cut, "Omit the determinant row");
  tf_export->add_flag("--no-symmetry", s.no_symmetry, "Omit the adjacent-material rows");

  const auto add_growth = [&](CLI::App* c) {
    c->add_option("--growth", s.growth, "Growth CSV (drug,genotype,growth_rate)")->check(CLI::ExistingFile);
    c->add_option("--synthetic", s.synthetic, "Synthetic table: g K seed")->expected(3);
    c->add_option("--model", s.model, "Probability model")->check(CLI::IsMember({"cpm", "epm"}));
    c->add_option("--tie", s.tie, "Rows with no strict improvement or dominance")->check(CLI::IsMember({"strict", "absorb"}));
  };
  const auto add_instance = [&](CLI::App* c) {
    add_growth(c);
    c->add_option("--initial", s.initial, "Initial genotype bit string")->required();
    c->add_option("--target", s.target_genotype, "Target genotype (default: wild type)");
    c->add_option("--steps", s.steps, "Treatment length N")->required()->check(CLI::PositiveNumber);
  };

  auto* atm = app.add_subcommand("atm", "Antibiotic time machine");
  atm->require_subcommand(1);
  auto* atm_build = atm->add_subcommand("build", "Build transition matrices");
  add_growth(atm_build);
  atm_build->add_option("--out", s.out_csv, "Write transitions as CSV (drug,from,to,probability)");
  auto* atm_solve = atm->add_subcommand("solve", "Branch and bound");
  add_instance(atm_solve);
  atm_solve->add_option("--gap", s.atm_gap, "Absolute optimality gap")->check(CLI::NonNegativeNumber);
  atm_solve->add_option("--bound", s.bound, "Node bound")->check(CLI::IsMember({"lp", "dp", "best"}));
  atm_solve->add_option("--out", s.out_csv, "Write the drug sequence as CSV");
  add_threads(atm_solve);
  auto* atm_enum = atm->add_subcommand("enumerate", "Exhaustive search over all K^N sequences");
  add_instance(atm_enum);
  atm_enum->add_option("--budget", s.budget, "Maximum number of sequences");
  atm_enum->add_option("--out", s.out_csv, "Write the drug sequence as CSV");
  auto* atm_gen = atm->add_subcommand("gen", "Generate a synthetic growth table");
  atm_gen->add_option("--g", s.g, "Alleles")->required();
  atm_gen->add_option("--K", s.K, "Drugs")->required();
  atm_gen->add_option("--seed", s.seed, "RNG seed")->required();
  atm_gen->add_option("--out", s.out_csv, "Write the table as growth CSV");
  auto* atm_export = atm->add_subcommand("export", "Write the extended MILP as JSON");
  add_instance(atm_export);
  atm_export->add_option("--output", s.output, "Formulation JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (tf->parsed()) {
      const auto lib = detail::load_library(s);
      if (tf_heur->parsed()) {
        const auto d = quarter_wave_heuristic(lib, s.layers);
        auto j = detail::envelope(s, "thinfilm heuristic");
        j["reflectance"] = num(d.reflectance);
        j["design"] = design_json(d, lib);
        if (!s.out_csv.empty()) detail::write_design_csv(d, lib, s.out_csv);
        out << j.dump(2) << '\n';
        return 0;
      }
      if (tf_solve->parsed()) {
        ThinFilmOptions o;
        o.gap = s.tf_gap;
        o.target = s.target;
        o.time_limit = s.time_limit;
        o.symmetry_breaking = !s.no_symmetry;
        o.threads = s.threads;
        o.node_limit = s.node_limit;
        const auto res = solve_thinfilm(lib, s.layers, o);
        auto j = detail::envelope(s, "thinfilm solve");
        j["reflectance"] = num(res.design.reflectance);
        j["report"] = detail::report_for(s, res.report);
        j["design"] = design_json(res.design, lib);
        if (!s.out_csv.empty()) detail::write_design_csv(res.design, lib, s.out_csv);
        out << j.dump(2) << '\n';
        return detail::limit_code(res.report.status);
      }
      const auto f = build_thinfilm_formulation(lib, s.layers, {.det_cut = !s.no_det_cut, .symmetry_breaking = !s.no_symmetry});
      export_formulation(f.model, s.output);
      auto j = detail::envelope(s, "thinfilm export");
      j["output"] = s.output;
      j["kind"] = f.model.kind;
      j["variables"] = f.model.variables.size();
      j["binaries"] = f.model.count(VarKind::Binary);
      j["constraints"] = f.model.constraints.size();
      out << j.dump(2) << '\n';
      return 0;
    }

    if (atm_gen->parsed()) {
      const auto t = gen_synthetic(s.g, s.K, s.seed);
      auto j = detail::envelope(s, "atm gen");
      j["g"] = t.g;
      j["K"] = t.K();
      j["seed"] = s.seed;
      if (!s.out_csv.empty()) {
        auto f = detail::open_out(s.out_csv);
        write_growth_csv(t, f);
        j["output"] = s.out_csv;
      } else {
        std::ostringstream csv;
        write_growth_csv(t, csv);
        j["growth_csv"] = csv.str();
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    const auto table = detail::load_growth(s);
    const auto T = detail::load_transitions(s, table);
    if (atm_build->parsed()) {
      auto j = detail::envelope(s, "atm build");
      j["model"] = s.model;
      j["tie"] = s.tie;
      j["g"] = table.g;
      j["drugs"] = table.drugs;
      j["stochastic"] = all_stochastic(T);
      if (!s.out_csv.empty()) {
        auto f = detail::open_out(s.out_csv);
        write_transitions_csv(T, table, f);
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    const std::size_t initial = table.space().index(s.initial);
    const std::size_t target = detail::genotype_or_wild(table, s.target_genotype);
    const auto instance = [&](json& j) {
      j["model"] = s.model;
      j["initial"] = s.initial;
      j["target"] = table.space().name(target);
      j["steps"] = s.steps;
    };
    if (atm_export->parsed()) {
      const auto problem = make_atm_problem(T, initial, target, s.steps);
      const auto f = build_extended_formulation(problem, SimplexOuter{all_stochastic(T)});
      export_formulation(f.model, s.output);
      auto j = detail::envelope(s, "atm export");
      instance(j);
      j["output"] = s.output;
      j["variables"] = f.model.variables.size();
      j["binaries"] = f.model.count(VarKind::Binary);
      j["constraints"] = f.model.constraints.size();
      out << j.dump(2) << '\n';
      return 0;
    }

    SolveReport r;
    std::string command;
    if (atm_solve->parsed()) {
      ATMOptions o;
      o.bb.gap = s.atm_gap;
      o.bb.bound = s.bound == "lp" ? BoundMode::LP : (s.bound == "dp" ? BoundMode::DP : BoundMode::Best);
      o.bb.threads = s.threads;
      o.bb.node_limit = s.node_limit;
      r = solve_atm(T, initial, target, s.steps, o);
      command = "atm solve";
    } else {
      r = enumerate_exact(make_atm_problem(T, initial, target, s.steps), s.budget);
      command = "atm enumerate";
    }
    auto j = detail::envelope(s, command);
    instance(j);
    j["value"] = num(r.optimal_value);
    j["sequence"] = detail::sequence_json(table, r.optimal_sequence);
    j["report"] = detail::report_for(s, r);
    if (!s.out_csv.empty()) detail::write_sequence_csv(table, r.optimal_sequence, s.out_csv);
    out << j.dump(2) << '\n';
    return detail::limit_code(r.status);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace matchain
