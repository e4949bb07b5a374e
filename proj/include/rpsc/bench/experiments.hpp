// Experiment runners: clustering error versus projection dimension, the noise
// phase diagram, clustering of user-supplied matrices, parameter selection on
// unprojected data and tables of the theoretical clustering conditions.
//
// Seeds are derived as derive_seed(master, hash(id), trial, ...), so every
// cell is reproducible on its own and results do not depend on how cells are
// scheduled across threads. Rows are emitted in (trial, projection, p, sigma,
// algorithm) order.
#pragma once

#include "rpsc/bench/config.hpp"
#include "rpsc/bench/csv.hpp"
#include "rpsc/bench/dataset_io.hpp"
#include "rpsc/evalmetrics.hpp"
#include "rpsc/theory.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace rpsc::bench {

struct ResultRow {
  std::string experiment;
  Index trial = 0;
  std::string algorithm;
  double param = 0.0;
  std::string projection;
  Index p = 0;
  double sigma = 0.0;
  std::string l_mode = "oracle";  // "oracle" or "eigengap"
  Index l_hat = 0;
  std::uint64_t trial_seed = 0;
  std::optional<double> ce;  // empty when no ground truth is available
  std::optional<bool> nfc;
  Index violating_pairs = 0;
  Index unconverged = 0;
  double t_projection = 0.0;
  double t_adjacency = 0.0;
  double t_spectral = 0.0;
  double t_total = 0.0;
};

struct SummaryRow {
  std::string experiment;
  std::string algorithm;
  double param = 0.0;
  std::string projection;
  Index p = 0;
  double x = 0.0;  // sqrt(d_max / p)
  double sigma = 0.0;
  std::string l_mode;
  Index trials = 0;
  double mean_ce = 0.0;
  double std_ce = 0.0;
  double nfc_rate = 0.0;
  double mean_t_projection = 0.0;
  double mean_t_adjacency = 0.0;
  double mean_t_spectral = 0.0;
};

struct CurveSample {
  double x = 0.0;
  Index p = 0;  // 0 for samples not on the p grid
  std::optional<double> sigma_star;
};

struct Prediction {
  std::string name;
  std::vector<int> labels;
};

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<CurveSample> curve;
  std::vector<Prediction> predictions;
  std::map<std::string, double> selected;  // algorithm -> parameter
};

// ---------------------------------------------------------------- helpers

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

enum SeedTag : std::uint64_t {
  kArrangement = 1,
  kPoints = 2,
  kNoise = 3,
  kProjection = 4,
  kKMeans = 5,
  kSelect = 6,
};

inline Index distinct_count(const std::vector<int>& labels) {
  return static_cast<Index>(std::set<int>(labels.begin(), labels.end()).size());
}

}  // namespace detail

inline std::uint64_t trial_seed(const ExperimentConfig& c, Index trial) {
  return derive_seed({c.seed, hash_string(c.id), static_cast<std::uint64_t>(trial)});
}

inline std::uint64_t projection_seed(const ExperimentConfig& c, Index trial, ProjectionKind kind, Index p) {
  return derive_seed({c.seed, hash_string(c.id), static_cast<std::uint64_t>(trial), detail::kProjection,
                      static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(p)});
}

inline std::uint64_t kmeans_seed(const ExperimentConfig& c, Index trial, ProjectionKind kind, Index p,
                                 std::size_t sigma_index, Algorithm a) {
  return derive_seed({c.seed, hash_string(c.id), static_cast<std::uint64_t>(trial), detail::kKMeans,
                      static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(p), sigma_index,
                      static_cast<std::uint64_t>(a)});
}

/// Noiseless dataset drawn from the configured model with the given seed.
inline Dataset make_model_dataset(const ExperimentConfig& c, std::uint64_t seed) {
  const SubspaceArrangement arr =
      make_arrangement(c.m, c.dims, c.arrangement, c.r, derive_seed({seed, detail::kArrangement}));
  return sample_points(arr, c.counts, derive_seed({seed, detail::kPoints}));
}

inline Dataset make_trial_dataset(const ExperimentConfig& c, Index trial, std::size_t sigma_index = 0) {
  const std::uint64_t seed = trial_seed(c, trial);
  Dataset ds = make_model_dataset(c, seed);
  return add_noise(std::move(ds), c.sigmas.at(sigma_index), derive_seed({seed, detail::kNoise, sigma_index}));
}

/// Adjacency for one algorithm; `param` is q, lambda or s_max.
inline AdjacencyMatrix build_adjacency(const Matrix& x, Algorithm a, double param, const ExperimentConfig& c,
                                       unsigned threads = 1) {
  switch (a) {
    case Algorithm::tsc:
      return tsc_adjacency(x, std::min<Index>(static_cast<Index>(param), x.cols() - 1), threads);
    case Algorithm::ssc: {
      SscOptions opt;
      opt.mode = SscMode::lasso;
      opt.lambda = param;
      opt.admm = c.admm;
      opt.threads = threads;
      return ssc_adjacency(x, opt);
    }
    case Algorithm::sscomp:
      return sscomp_adjacency(x, static_cast<Index>(param), c.omp_residual_tol, threads);
  }
  throw ConfigError("unknown algorithm");
}

struct Selection {
  double best = 0.0;
  std::vector<double> grid;
  std::vector<double> ce;
};

/// Grid value with the lowest clustering error on `ds` (oracle number of
/// clusters); ties go to the smaller value.
inline Selection select_params(const Dataset& ds, Algorithm a, const std::vector<double>& grid,
                               const ExperimentConfig& c, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("select_params: empty grid");
  if (!ds.has_labels()) throw UsageError("select_params: ground-truth labels required");
  Selection sel;
  sel.grid = grid;
  sel.ce.assign(grid.size(), 1.0);
  const Index clusters = detail::distinct_count(ds.labels);
  parallel_for(static_cast<Index>(grid.size()), c.threads, [&](Index g) {
    const double value = grid[g];
    if (a != Algorithm::ssc && (value < 1 || value > ds.size() - 1)) return;
    const AdjacencyMatrix adj = build_adjacency(ds.points, a, value, c);
    const SpectralResult sr = spectral_clustering(
        adj.weights, clusters, derive_seed({seed, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(g)}),
        c.kmeans);
    sel.ce[g] = clustering_error(sr.labels, ds.labels).ce;
  });
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (sel.ce[g] < sel.ce[best] || (sel.ce[g] == sel.ce[best] && grid[g] < grid[best])) best = g;
  sel.best = grid[best];
  return sel;
}

inline std::vector<Index> p_values_for(const ExperimentConfig& c, ProjectionKind kind, Index m) {
  if (kind == ProjectionKind::identity) return {m};
  return c.p_grid;
}

/// Mean / spread per (algorithm, param, projection, p, sigma, l_mode).
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, Index d_max) {
  using Key = std::tuple<std::string, std::string, double, std::string, double, Index>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows)
    groups[Key{r.projection, r.algorithm, r.param, r.l_mode, r.sigma, r.p}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    const ResultRow& first = *members.front();
    s.experiment = first.experiment;
    s.algorithm = first.algorithm;
    s.param = first.param;
    s.projection = first.projection;
    s.p = first.p;
    s.x = d_max > 0 ? std::sqrt(static_cast<double>(d_max) / static_cast<double>(first.p)) : 0.0;
    s.sigma = first.sigma;
    s.l_mode = first.l_mode;
    s.trials = static_cast<Index>(members.size());
    double sum = 0.0, sq = 0.0, nfc = 0.0;
    Index with_ce = 0;
    for (const ResultRow* r : members) {
      if (r->ce) {
        sum += *r->ce;
        sq += *r->ce * *r->ce;
        ++with_ce;
      }
      if (r->nfc && *r->nfc) nfc += 1.0;
      s.mean_t_projection += r->t_projection;
      s.mean_t_adjacency += r->t_adjacency;
      s.mean_t_spectral += r->t_spectral;
    }
    const double n = static_cast<double>(members.size());
    if (with_ce > 0) {
      s.mean_ce = sum / static_cast<double>(with_ce);
      s.std_ce = std::sqrt(std::max(0.0, sq / static_cast<double>(with_ce) - s.mean_ce * s.mean_ce));
    }
    s.nfc_rate = nfc / n;
    s.mean_t_projection /= n;
    s.mean_t_adjacency /= n;
    s.mean_t_spectral /= n;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- runners

/// Shared engine for ce_vs_p, ambient_span and phase_diagram.
inline RunOutput run_synthetic(const ExperimentConfig& c) {
  validate(c);
  RunOutput out;
  const Index num_clusters = c.num_subspaces();

  std::map<Algorithm, double> params;
  if (c.select_params) {
    const std::uint64_t sel_seed = derive_seed({c.seed, hash_string(c.id), detail::kSelect});
    Dataset sel = add_noise(make_model_dataset(c, sel_seed), c.sigmas.front(), derive_seed({sel_seed, detail::kNoise}));
    for (Algorithm a : c.algorithms) params[a] = select_params(sel, a, c.grid_for(a), c, sel_seed).best;
  } else {
    for (Algorithm a : c.algorithms) params[a] = c.grid_for(a).front();
  }
  for (const auto& [a, v] : params) out.selected[to_string(a)] = v;

  struct Cell {
    Index trial;
    ProjectionKind kind;
    Index p;
    std::size_t sigma_index;
  };
  std::vector<Cell> cells;
  for (Index t = 0; t < c.trials; ++t)
    for (ProjectionKind kind : c.projections)
      for (Index p : p_values_for(c, kind, c.m))
        for (std::size_t si = 0; si < c.sigmas.size(); ++si) cells.push_back({t, kind, p, si});

  std::vector<std::vector<ResultRow>> per_cell(cells.size());
  parallel_for(static_cast<Index>(cells.size()), c.threads, [&](Index ci) {
    const Cell& cell = cells[ci];
    const Dataset ds = make_trial_dataset(c, cell.trial, cell.sigma_index);

    auto t0 = detail::Clock::now();
    const ProjectionOperator op = make_projection(cell.kind, c.m, cell.p, projection_seed(c, cell.trial, cell.kind, cell.p));
    const Matrix x = op.apply(ds.points);
    const double t_proj = detail::seconds_since(t0);

    for (Algorithm a : c.algorithms) {
      ResultRow row;
      row.experiment = c.id;
      row.trial = cell.trial;
      row.algorithm = to_string(a);
      row.param = params[a];
      row.projection = to_string(cell.kind);
      row.p = cell.p;
      row.sigma = c.sigmas[cell.sigma_index];
      row.trial_seed = trial_seed(c, cell.trial);

      const auto t1 = detail::Clock::now();
      const AdjacencyMatrix adj = build_adjacency(x, a, params[a], c);
      const double t_adj = detail::seconds_since(t1);
      const NfcResult nfc = no_false_connections(adj.weights, ds.labels);

      const auto t2 = detail::Clock::now();
      const Eigensystem eig = laplacian_spectrum(adj.weights);
      const double t_eig = detail::seconds_since(t2);
      const std::uint64_t kseed = kmeans_seed(c, cell.trial, cell.kind, cell.p, cell.sigma_index, a);

      const auto t3 = detail::Clock::now();
      const SpectralResult sr = spectral_clustering_from(eig, num_clusters, kseed, c.kmeans);
      const double t_spec = t_eig + detail::seconds_since(t3);

      row.l_hat = num_clusters;
      row.ce = clustering_error(sr.labels, ds.labels).ce;
      row.nfc = nfc.ok;
      row.violating_pairs = nfc.violating_pairs;
      row.unconverged = adj.unconverged;
      if (c.timings) {
        row.t_projection = t_proj;
        row.t_adjacency = t_adj;
        row.t_spectral = t_spec;
        row.t_total = t_proj + detail::seconds_since(t1);
      }
      per_cell[ci].push_back(row);

      if (c.estimate_L) {
        const auto t4 = detail::Clock::now();
        const Index l_hat = eigengap_from_spectrum(eig.values, c.L_max);
        const SpectralResult est = spectral_clustering_from(eig, l_hat, kseed, c.kmeans);
        ResultRow erow = row;
        erow.l_mode = "eigengap";
        erow.l_hat = l_hat;
        erow.ce = clustering_error(est.labels, ds.labels).ce;
        if (c.timings) {
          erow.t_spectral = t_eig + detail::seconds_since(t4);
          erow.t_total = t_proj + t_adj + erow.t_spectral;
        }
        per_cell[ci].push_back(erow);
      }
    }
  });
  for (auto& rows : per_cell)
    for (auto& r : rows) out.rows.push_back(std::move(r));
  out.summary = summarize(out.rows, c.d_max());

  if (c.kind == ExperimentKind::phase_diagram) {
    const auto [c1, c2, c3] = c.phase_curve;
    const double d = static_cast<double>(c.d_max());
    for (Index p : c.p_grid) out.curve.push_back({std::sqrt(d / static_cast<double>(p)), p, phase_sigma_star(d, static_cast<double>(p), c1, c2, c3)});
    for (double x : linspace(0.05, 1.25, 49)) out.curve.push_back({x, 0, phase_sigma_star_at(x, c1, c2, c3)});
  }
  return out;
}

inline RunOutput run_ce_vs_p(const ExperimentConfig& c) { return run_synthetic(c); }
inline RunOutput run_phase_diagram(const ExperimentConfig& c) { return run_synthetic(c); }

/// Clusters the matrix stored at c.data_path (one point per row), projecting
/// it with every configured kind/p. Predicted labels are returned in
/// `predictions`; CE is filled in when c.labels_path is set.
inline RunOutput cluster_file(const ExperimentConfig& c) {
  validate(c);
  RunOutput out;
  Dataset ds;
  ds.points = load_points(c.data_path);
  if (!c.labels_path.empty()) ds.labels = load_labels(c.labels_path, ds.size());
  if (c.normalize) ds.points = normalized_columns(ds.points);
  const Index m = ds.dim();
  for (ProjectionKind kind : c.projections)
    for (Index p : p_values_for(c, kind, m))
      if (p > m && kind != ProjectionKind::gaussian)
        throw ConfigError("p=" + std::to_string(p) + " exceeds the data dimension " + std::to_string(m));

  std::map<Algorithm, double> params;
  for (Algorithm a : c.algorithms) {
    if (c.select_params && ds.has_labels())
      params[a] = select_params(ds, a, c.grid_for(a), c, derive_seed({c.seed, hash_string(c.id), detail::kSelect})).best;
    else
      params[a] = c.grid_for(a).front();
    out.selected[to_string(a)] = params[a];
  }
  const Index oracle_clusters = c.clusters > 0 ? c.clusters : (ds.has_labels() ? detail::distinct_count(ds.labels) : 0);

  for (Index t = 0; t < c.trials; ++t)
    for (ProjectionKind kind : c.projections)
      for (Index p : p_values_for(c, kind, m)) {
        const auto t0 = detail::Clock::now();
        const Matrix x = make_projection(kind, m, p, projection_seed(c, t, kind, p)).apply(ds.points);
        const double t_proj = detail::seconds_since(t0);
        for (Algorithm a : c.algorithms) {
          ResultRow row;
          row.experiment = c.id;
          row.trial = t;
          row.algorithm = to_string(a);
          row.param = params[a];
          row.projection = to_string(kind);
          row.p = p;
          row.trial_seed = trial_seed(c, t);
          const auto t1 = detail::Clock::now();
          const AdjacencyMatrix adj = build_adjacency(x, a, params[a], c, c.threads);
          const double t_adj = detail::seconds_since(t1);
          const auto t2 = detail::Clock::now();
          const Eigensystem eig = laplacian_spectrum(adj.weights);
          Index l_hat = oracle_clusters;
          if (l_hat == 0) {
            l_hat = eigengap_from_spectrum(eig.values, c.L_max);
            row.l_mode = "eigengap";
          }
          const SpectralResult sr = spectral_clustering_from(eig, l_hat, kmeans_seed(c, t, kind, p, 0, a), c.kmeans);
          const double t_spec = detail::seconds_since(t2);
          row.l_hat = l_hat;
          row.unconverged = adj.unconverged;
          if (ds.has_labels()) {
            row.ce = clustering_error(sr.labels, ds.labels).ce;
            const NfcResult nfc = no_false_connections(adj.weights, ds.labels);
            row.nfc = nfc.ok;
            row.violating_pairs = nfc.violating_pairs;
          }
          if (c.timings) {
            row.t_projection = t_proj;
            row.t_adjacency = t_adj;
            row.t_spectral = t_spec;
            row.t_total = t_proj + detail::seconds_since(t1);
          }
          out.rows.push_back(row);
          out.predictions.push_back({to_string(a) + "_" + to_string(kind) + "_p" + std::to_string(p) + "_t" +
                                         std::to_string(t),
                                     sr.labels});
        }
      }
  out.summary = summarize(out.rows, 0);
  return out;
}

struct TheoryRow {
  Index p = 0;
  double sigma = 0.0;
  ConditionReport report;
};

/// Evaluates all five clustering conditions across the p grid (and sigma grid
/// for the noisy TSC condition), using the measured maximum affinity of a
/// realized arrangement unless max_aff is given explicitly.
inline std::vector<TheoryRow> run_theory_table(const ExperimentConfig& c) {
  if (c.p_grid.empty()) throw ConfigError("theory table: empty p grid");
  if (c.dims.empty() || c.counts.size() != c.dims.size())
    throw ConfigError("theory table: dims and counts must have one entry per subspace");
  double max_aff = 0.0;
  if (c.max_aff) {
    max_aff = *c.max_aff;
  } else {
    const SubspaceArrangement arr = make_arrangement(c.m, c.dims, c.arrangement, c.r,
                                                     derive_seed({trial_seed(c, 0), detail::kArrangement}));
    max_aff = max_affinity(arr);
  }
  const double n = static_cast<double>(c.num_points());
  const double l = static_cast<double>(c.num_subspaces());
  double rho_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.dims.size(); ++k)
    rho_min = std::min(rho_min, static_cast<double>(c.counts[k] - 1) / static_cast<double>(c.dims[k]));
  const double d_max = static_cast<double>(c.d_max());
  const double d_min = static_cast<double>(*std::min_element(c.dims.begin(), c.dims.end()));
  const double tau = c.tau.value_or(default_tau(n));

  std::vector<TheoryRow> rows;
  for (Index p : c.p_grid) {
    const double pd = static_cast<double>(p);
    auto push = [&](double sigma, ConditionReport rep) {
      rep.inputs.m = static_cast<double>(c.m);
      rows.push_back({p, sigma, std::move(rep)});
    };
    push(0.0, tsc_condition(max_aff, d_max, pd, n, c.c_tilde));
    push(0.0, ssc_condition(max_aff, d_max, pd, n, l, rho_min, tau, c.c_tilde));
    push(0.0, sscomp_condition(max_aff, d_max, d_min, pd, n, l, rho_min, tau, c.c_tilde));
    for (double s : c.sigmas) push(s, tsc_noisy_condition(max_aff, d_max, pd, n, s, c.c_tilde));
    push(0.0, sscomp_ambient_condition(max_aff, n, rho_min));
  }
  return rows;
}

// ---------------------------------------------------------------- CSV

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  write_csv_row(os, {"experiment", "trial", "algorithm", "param", "projection", "p", "sigma", "l_mode", "l_hat",
                     "trial_seed", "ce", "nfc", "violating_pairs", "unconverged", "t_projection", "t_adjacency",
                     "t_spectral", "t_total"});
  for (const auto& r : rows)
    write_csv_row(os, {r.experiment, std::to_string(r.trial), r.algorithm, fmt_num(r.param), r.projection,
                       std::to_string(r.p), fmt_num(r.sigma), r.l_mode, std::to_string(r.l_hat),
                       std::to_string(r.trial_seed), fmt_opt(r.ce),
                       r.nfc ? (*r.nfc ? "1" : "0") : "", std::to_string(r.violating_pairs),
                       std::to_string(r.unconverged), fmt_num(r.t_projection, "%.6f"),
                       fmt_num(r.t_adjacency, "%.6f"), fmt_num(r.t_spectral, "%.6f"), fmt_num(r.t_total, "%.6f")});
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  write_csv_row(os, {"experiment", "algorithm", "param", "projection", "p", "x", "sigma", "l_mode", "trials",
                     "mean_ce", "std_ce", "nfc_rate", "mean_t_projection", "mean_t_adjacency", "mean_t_spectral"});
  for (const auto& s : rows)
    write_csv_row(os, {s.experiment, s.algorithm, fmt_num(s.param), s.projection, std::to_string(s.p), fmt_num(s.x),
                       fmt_num(s.sigma), s.l_mode, std::to_string(s.trials), fmt_num(s.mean_ce), fmt_num(s.std_ce),
                       fmt_num(s.nfc_rate), fmt_num(s.mean_t_projection, "%.6f"),
                       fmt_num(s.mean_t_adjacency, "%.6f"), fmt_num(s.mean_t_spectral, "%.6f")});
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurveSample>& curve) {
  write_csv_row(os, {"x", "p", "sigma_star"});
  for (const auto& s : curve) write_csv_row(os, {fmt_num(s.x), s.p ? std::to_string(s.p) : "", fmt_opt(s.sigma_star)});
}

inline void write_theory_csv(std::ostream& os, const std::vector<TheoryRow>& rows) {
  write_csv_row(os, {"condition", "p", "sigma", "max_aff", "d_max", "d_min", "N", "L", "rho_min", "m", "c_tilde",
                     "tau", "lhs", "rhs", "margin", "satisfied"});
  for (const auto& r : rows) {
    const auto& in = r.report.inputs;
    write_csv_row(os, {r.report.condition, std::to_string(r.p), fmt_num(r.sigma), fmt_num(in.max_aff),
                       fmt_num(in.d_max), fmt_num(in.d_min), fmt_num(in.N), fmt_num(in.L), fmt_num(in.rho_min),
                       fmt_num(in.m), fmt_num(in.c_tilde), fmt_num(in.tau), fmt_num(r.report.lhs, "%.12g"),
                       fmt_num(r.report.rhs, "%.12g"), fmt_num(r.report.margin, "%.12g"),
                       r.report.satisfied ? "1" : "0"});
  }
}

inline std::string results_csv_string(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_results_csv(os, rows);
  return os.str();
}

/// `<dir>/<stem><suffix>` next to the main output file.
inline std::string sibling_path(const std::string& out, const std::string& suffix) {
  const std::filesystem::path path(out);
  return (path.parent_path() / (path.stem().string() + suffix)).string();
}

/// Writes the rows to `out`, the summary to <stem>_summary.csv, the phase
/// curve (if any) to <stem>_curve.csv and predicted labels to
/// <stem>_<run>.labels.
inline std::vector<std::string> save_outputs(const RunOutput& r, const std::string& out) {
  std::vector<std::string> written;
  auto open = [&](const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    written.push_back(path);
    return os;
  };
  {
    auto os = open(out);
    write_results_csv(os, r.rows);
  }
  {
    auto os = open(sibling_path(out, "_summary.csv"));
    write_summary_csv(os, r.summary);
  }
  if (!r.curve.empty()) {
    auto os = open(sibling_path(out, "_curve.csv"));
    write_curve_csv(os, r.curve);
  }
  for (const auto& pred : r.predictions) {
    const std::string path = sibling_path(out, "_" + pred.name + ".labels");
    save_labels(path, pred.labels);
    written.push_back(path);
  }
  return written;
}

}  // namespace rpsc::bench
