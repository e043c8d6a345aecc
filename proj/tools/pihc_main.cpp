#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pihc/digraph.hpp"
#include "pihc/experiments.hpp"
#include "pihc/hc_solve.hpp"
#include "pihc/pattern.hpp"
#include "pihc/pipeline.hpp"
#include "pihc/process.hpp"
#include "pihc/sin_tout.hpp"

namespace {

using namespace pihc;

std::string orientation_text(const std::vector<Dir>& dirs) {
  std::string s;
  for (Dir d : dirs) s += d == Dir::Forward ? '>' : '<';
  return s;
}

void print_witness(std::ostream& os, const CycleWitness& w) {
  os << "vertices:";
  for (int v : w.vertices) os << ' ' << v;
  os << "\norientations: " << orientation_text(w.orientations) << '\n';
}

LabeledDigraph load_digraph(const std::string& path) {
  if (path == "-") return read_digraph(std::cin);
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--in", "cannot open " + path);
  return read_digraph(in);
}

struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit OutStream(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path, std::ios::binary);
    if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
    os = &file;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"patterned Hamilton cycles in random digraphs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_path;
  std::string format = "csv";
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker count (output is identical for any value)");
  app.add_option("--out", out_path, "output file, '-' or empty for stdout");
  app.add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // pattern
  auto* sub_pattern = app.add_subcommand("pattern", "canonical form and class of a pattern");
  std::string pattern_text;
  sub_pattern->add_option("text", pattern_text, "pattern glyphs, e.g. '>><'")->required();
  sub_pattern->callback([&] {
    const Pattern p = parse_pattern(pattern_text);
    OutStream out(out_path);
    *out.os << "pattern: " << to_string(p) << '\n'
            << "canonical: " << to_string(canonical_form(p)) << '\n'
            << "class: " << to_string(classify(p)) << '\n'
            << "primitive: " << (is_primitive(p) ? "yes" : "no") << '\n';
  });

  // gen
  auto* sub_gen = app.add_subcommand("gen", "sample a random digraph");
  int gen_n = 16;
  double gen_p = -1.0;
  std::int64_t gen_m = -1;
  sub_gen->add_option("--n", gen_n, "vertex count")->required();
  auto* opt_p = sub_gen->add_option("--p", gen_p, "arc density (two-round model)");
  auto* opt_m = sub_gen->add_option("--m", gen_m, "exact arc count");
  opt_p->excludes(opt_m);
  sub_gen->callback([&] {
    Rng rng(seed);
    OutStream out(out_path);
    if (gen_m >= 0)
      write_digraph(*out.os, sample_dnm(gen_n, gen_m, rng));
    else if (gen_p >= 0.0)
      write_digraph(*out.os, sample_dnp(gen_n, gen_p, rng));
    else
      throw CLI::ValidationError("gen", "one of --p or --m is required");
  });

  // solve-exact
  auto* sub_solve = app.add_subcommand("solve-exact", "exhaustive patterned cycle search");
  std::string solve_in = "-";
  std::string solve_pattern = "><";
  sub_solve->add_option("--in", solve_in, "digraph file, '-' for stdin");
  sub_solve->add_option("--pattern", solve_pattern, "pattern glyphs")->required();
  sub_solve->callback([&] {
    const LabeledDigraph d = load_digraph(solve_in);
    const Pattern p = parse_pattern(solve_pattern);
    OutStream out(out_path);
    if (auto w = exact_pi_hc(d, p)) {
      *out.os << "found\n";
      print_witness(*out.os, *w);
    } else {
      *out.os << "none\n";
    }
  });

  // sintout
  auto* sub_sintout =
      app.add_subcommand("sintout", "sampled choice instances: chained matchings and cycle");
  int st_k = 3;
  int st_bin = 300;
  int st_trials = 1;
  std::string st_pattern = ">><";
  sub_sintout->add_option("--k", st_k, "bin count")->check(CLI::Range(3, 64));
  sub_sintout->add_option("--bin-size", st_bin, "vertices per bin")->check(CLI::PositiveNumber);
  sub_sintout->add_option("--trials", st_trials, "trial count")->check(CLI::PositiveNumber);
  sub_sintout->add_option("--pattern", st_pattern, "pattern glyphs, length k");
  sub_sintout->callback([&] {
    const Pattern p = parse_pattern(st_pattern);
    if (static_cast<int>(p.length()) != st_k)
      throw CLI::ValidationError("--pattern", "pattern length must equal --k");
    OutStream out(out_path);
    std::vector<std::vector<int>> bins(st_k);
    for (int b = 0; b < st_k; ++b)
      for (int i = 0; i < st_bin; ++i) bins[b].push_back(b * st_bin + i);
    const IntMatrix counts = cyclic_two_matrix(st_k);
    int ok = 0;
    for (int t = 0; t < st_trials; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(t));
      const SinToutInstance inst = sample_sin_tout(bins, counts, counts, rng);
      auto family = chain_matchings(inst, p);
      if (!family) {
        *out.os << "trial " << t << ": " << family.error().message << '\n';
        continue;
      }
      auto witness = hc_on_contracted(family.value(), inst, p, rng);
      if (!witness) {
        *out.os << "trial " << t << ": " << witness.error().message << '\n';
        continue;
      }
      ++ok;
      *out.os << "trial " << t << ": cycle on " << witness.value().vertices.size()
              << " vertices verified\n";
    }
    *out.os << "success " << ok << "/" << st_trials << '\n';
  });

  // construct
  auto* sub_construct =
      app.add_subcommand("construct", "full hitting-time construction on one sampled process");
  int con_n = 200;
  std::string con_pattern = "><";
  int con_retries = 3;
  bool con_fallback = false;
  bool con_print = false;
  sub_construct->add_option("--n", con_n, "vertex count")->check(CLI::Range(16, 1 << 20));
  sub_construct->add_option("--pattern", con_pattern, "pattern glyphs")->required();
  sub_construct->add_flag("--fallback-exact", con_fallback,
                          "exhaustive search after retries when n <= 16");
  sub_construct->add_option("--retries", con_retries, "extra attempts with fresh bins");
  sub_construct->add_flag("--print-cycle", con_print, "print the witness on success");
  sub_construct->callback([&] {
    const Pattern p = parse_pattern(con_pattern);
    const ProcessTrace trace(con_n, seed);
    Rng rng(seed, 1);
    PipelineConfig config;
    config.retries = con_retries;
    config.fallback_exact = con_fallback;
    PipelineDiagnostics diag;
    auto result = run_pipeline(trace, p, rng, config, &diag);
    OutStream out(out_path);
    *out.os << "n: " << con_n << "\nattempts: " << diag.attempts
            << "\narc window: (" << diag.m_lower << ", " << diag.m_upper << ")"
            << "\nhitting index: " << diag.m_star << "\nclasses: good " << diag.good << ", bad "
            << diag.bad << ", dangerous " << diag.dangerous << '\n';
    if (result) {
      *out.os << "result: success, cycle verified at the hitting index\n";
      if (con_print) print_witness(*out.os, result.value());
    } else {
      *out.os << "result: " << to_string(result.error().stage) << " (detail "
              << result.error().detail << ")\nreason: " << result.error().message << '\n';
    }
  });

  // mc
  auto* sub_mc = app.add_subcommand("mc", "seeded Monte Carlo experiments");
  std::string experiment;
  std::vector<int> mc_n;
  std::string mc_pattern = "><";
  double mc_c = 0.0;
  int mc_trials = 100;
  std::string mc_solver = "pipeline+fallback";
  int mc_m = 500;
  int mc_restarts = -1;
  int mc_moves = -1;
  sub_mc->add_option("--experiment", experiment, "eventA, lowdeg, hitting or walkup")
      ->required()
      ->check(CLI::IsMember({"eventA", "lowdeg", "hitting", "walkup"}));
  sub_mc->add_option("--n", mc_n, "vertex counts (repeatable)");
  sub_mc->add_option("--pattern", mc_pattern, "pattern glyphs");
  sub_mc->add_option("--c", mc_c, "offset in the critical density");
  sub_mc->add_option("--trials", mc_trials, "trials per n")->check(CLI::PositiveNumber);
  sub_mc->add_option("--solver", mc_solver, "hitting-time solver")
      ->check(CLI::IsMember({"pipeline", "exact", "pipeline+fallback"}));
  sub_mc->add_option("--m", mc_m, "bipartite side size (walkup)");
  sub_mc->add_option("--restarts", mc_restarts, "search restarts override");
  sub_mc->add_option("--moves-per-vertex", mc_moves, "search moves per vertex override");
  sub_mc->callback([&] {
    ExperimentConfig cfg;
    cfg.n_values = mc_n;
    cfg.pattern = parse_pattern(mc_pattern);
    cfg.c = mc_c;
    cfg.trials = mc_trials;
    cfg.master_seed = seed;
    cfg.threads = threads;
    cfg.walkup_m = mc_m;
    if (mc_restarts > 0) cfg.pipeline.budget.restarts = mc_restarts;
    if (mc_moves > 0) cfg.pipeline.budget.moves_per_vertex = mc_moves;
    cfg.solver = mc_solver == "pipeline" ? SolverChoice::Pipeline
                 : mc_solver == "exact"  ? SolverChoice::Exact
                                         : SolverChoice::PipelineFallback;

    ExperimentResult result;
    if (experiment == "eventA") {
      cfg.experiment = ExperimentKind::EventA;
      result = mc_event_A(cfg);
    } else if (experiment == "lowdeg") {
      cfg.experiment = ExperimentKind::LowDegree;
      result = mc_low_degree(cfg);
    } else if (experiment == "hitting") {
      cfg.experiment = ExperimentKind::HittingTime;
      result = mc_hitting_time(cfg);
    } else {
      cfg.experiment = ExperimentKind::Walkup;
      result = mc_walkup(cfg);
    }
    OutStream out(out_path);
    emit(result, format == "json" ? OutputFormat::Json : OutputFormat::Csv, *out.os);
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
