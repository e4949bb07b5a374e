// rpsc-bench: experiment runner for random-projection subspace clustering.
//
//   rpsc-bench ce-vs-p  [--config cfg.json] [--seed S] [--threads T] [--out results.csv]
//   rpsc-bench phase    ...
//   rpsc-bench ambient  ...
//   rpsc-bench cluster  --data points.csv [--labels labels.txt] ...
//   rpsc-bench theory   ...
//   rpsc-bench selftest [--threads T]
//
// Exit status: 0 on success, 1 on a failed selftest or runtime error, 2 on
// bad usage or configuration.
#include "rpsc/bench/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace rpsc;
using namespace rpsc::bench;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<Index> trials;
  std::string out;
  std::string data;
  std::string labels;
  bool no_timings = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON config overriding the built-in defaults");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--trials", o.trials, "Monte Carlo trials per cell")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "results CSV path");
  sub->add_flag("--no-timings", o.no_timings, "write zero wall times (byte-stable output)");
}

ExperimentConfig resolve(ExperimentKind kind, const Overrides& o) {
  ExperimentConfig c = default_config(kind);
  if (!o.config.empty()) {
    c = apply_json(c, load_json_file(o.config));
    if (c.kind != kind)
      throw ConfigError("config declares experiment '" + to_string(c.kind) + "' but the subcommand runs '" +
                        to_string(kind) + "'");
  }
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.trials) c.trials = *o.trials;
  if (!o.out.empty()) c.out = o.out;
  if (!o.data.empty()) c.data_path = o.data;
  if (!o.labels.empty()) c.labels_path = o.labels;
  if (o.no_timings) c.timings = false;
  return c;
}

void report(const std::vector<std::string>& files, const RunOutput& r) {
  for (const auto& [alg, v] : r.selected) std::cerr << "selected " << alg << " parameter: " << v << "\n";
  for (const auto& f : files) std::cerr << "wrote " << f << "\n";
}

int run(ExperimentKind kind, const Overrides& o) {
  const ExperimentConfig c = resolve(kind, o);
  if (kind == ExperimentKind::theory_table) {
    const auto rows = run_theory_table(c);
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + c.out + "'");
    write_theory_csv(os, rows);
    std::cerr << "wrote " << c.out << "\n";
    return 0;
  }
  const RunOutput r = kind == ExperimentKind::cluster_file ? cluster_file(c) : run_synthetic(c);
  report(save_outputs(r, c.out), r);
  return 0;
}

std::string selftest_csv(ExperimentConfig c, unsigned threads) {
  c.threads = threads;
  const RunOutput r = run_synthetic(c);
  std::ostringstream os;
  write_results_csv(os, r.rows);
  write_summary_csv(os, r.summary);
  return os.str();
}

int selftest(const Overrides& o) {
  ExperimentConfig c = default_config(ExperimentKind::ce_vs_p);
  c.id = "selftest";
  c.trials = 1;
  c.p_grid = {8, 32, 128};
  c.projections = {ProjectionKind::gaussian};
  c.timings = false;
  if (o.seed) c.seed = *o.seed;
  const unsigned many = o.threads.value_or(8);
  const std::string one = selftest_csv(c, 1);
  const std::string multi = selftest_csv(c, many);
  if (!o.out.empty()) {
    std::ofstream os(o.out, std::ios::binary);
    os << one;
  }
  const bool same = one == multi;
  std::cout << (same ? "PASS" : "FAIL") << " selftest: 1 thread vs " << many << " threads, " << one.size()
            << " bytes, " << (same ? "identical" : "different") << "\n";
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace clustering after random projection: experiment runner"};
  app.require_subcommand(1);
  Overrides o;
  struct Sub {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const Sub subs[] = {
      {"ce-vs-p", "clustering error as a function of the projected dimension", ExperimentKind::ce_vs_p},
      {"phase", "clustering error over (sqrt(d/p), sigma)", ExperimentKind::phase_diagram},
      {"ambient", "subspaces spanning the ambient space", ExperimentKind::ambient_span},
      {"cluster", "cluster a data matrix read from file", ExperimentKind::cluster_file},
      {"theory", "evaluate the clustering conditions over the p grid", ExperimentKind::theory_table},
  };
  std::vector<std::pair<CLI::App*, ExperimentKind>> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, o);
    if (s.kind == ExperimentKind::cluster_file) {
      sub->add_option("--data", o.data, "points file (CSV or DRSC binary), one point per row");
      sub->add_option("--labels", o.labels, "ground-truth labels, one integer per line");
    }
    commands.emplace_back(sub, s.kind);
  }
  CLI::App* st = app.add_subcommand("selftest", "check that 1 and N threads give byte-identical CSV output");
  st->add_option("--seed", o.seed, "master seed");
  st->add_option("--threads", o.threads, "thread count compared against 1")->check(CLI::PositiveNumber);
  st->add_option("--out", o.out, "also write the single-thread CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (st->parsed()) return selftest(o);
    for (const auto& [sub, kind] : commands)
      if (sub->parsed()) return run(kind, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
