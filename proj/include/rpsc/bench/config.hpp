// Experiment configuration: built-in defaults that mirror the synthetic
// experiments at desk scale, overridable from a JSON file.
#pragma once

#include "rpsc/randproj.hpp"
#include "rpsc/sparsegraph.hpp"
#include "rpsc/spectral.hpp"
#include "rpsc/unionmodel.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <optional>
#include <set>

namespace rpsc::bench {

enum class ExperimentKind { ce_vs_p, phase_diagram, ambient_span, cluster_file, theory_table };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ce_vs_p: return "ce_vs_p";
    case ExperimentKind::phase_diagram: return "phase_diagram";
    case ExperimentKind::ambient_span: return "ambient_span";
    case ExperimentKind::cluster_file: return "cluster_file";
    case ExperimentKind::theory_table: return "theory_table";
  }
  return "unknown";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  if (s == "ce_vs_p" || s == "ce-vs-p") return ExperimentKind::ce_vs_p;
  if (s == "phase_diagram" || s == "phase") return ExperimentKind::phase_diagram;
  if (s == "ambient_span" || s == "ambient") return ExperimentKind::ambient_span;
  if (s == "cluster_file" || s == "cluster") return ExperimentKind::cluster_file;
  if (s == "theory_table" || s == "theory") return ExperimentKind::theory_table;
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ce_vs_p;
  std::string id = "ce_vs_p";

  // data model
  Index m = 4096;
  std::vector<Index> dims{20, 20, 20};
  ArrangementMode arrangement = ArrangementMode::shared_intersection;
  Index r = 4;
  std::vector<Index> counts{80, 80, 80};
  std::vector<double> sigmas{0.0};

  // projections; the identity kind always runs once with p = m
  std::vector<ProjectionKind> projections{ProjectionKind::gaussian, ProjectionKind::fast_dft};
  std::vector<Index> p_grid{8, 16, 32, 64, 128, 256};

  // algorithms and parameter grids
  std::vector<Algorithm> algorithms{Algorithm::tsc, Algorithm::ssc, Algorithm::sscomp};
  std::vector<double> q_grid{2, 4, 6, 8, 10, 12, 14, 16, 18};
  std::vector<double> lambda_grid{0.001, 0.002, 0.004, 0.008, 0.01, 0.02, 0.04, 0.08, 0.1, 0.2};
  std::vector<double> smax_grid{2, 4, 6, 8, 10, 12, 14, 16, 18};
  bool select_params = true;  // otherwise the first grid value is used
  double omp_residual_tol = 1e-6;
  AdmmOptions admm;
  KMeansOptions kmeans;
  bool estimate_L = false;  // add eigengap rows next to the oracle-L rows
  Index L_max = 10;

  // harness
  Index trials = 20;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool timings = true;
  std::string out = "results.csv";

  // phase-diagram overlay
  std::array<double, 3> phase_curve{0.8, 0.1, 0.8};

  // theory table
  double c_tilde = 1.0;
  std::optional<double> tau;
  std::optional<double> max_aff;

  // cluster_file
  std::string data_path;
  std::string labels_path;
  bool normalize = true;
  Index clusters = 0;  // 0: estimate with the eigengap heuristic

  Index num_subspaces() const { return static_cast<Index>(dims.size()); }
  Index num_points() const {
    Index n = 0;
    for (Index c : counts) n += c;
    return n;
  }
  Index d_max() const { return dims.empty() ? 0 : *std::max_element(dims.begin(), dims.end()); }

  const std::vector<double>& grid_for(Algorithm a) const {
    switch (a) {
      case Algorithm::tsc: return q_grid;
      case Algorithm::ssc: return lambda_grid;
      case Algorithm::sscomp: return smax_grid;
    }
    return q_grid;
  }
};

inline std::vector<double> linspace(double lo, double hi, Index n) {
  std::vector<double> v;
  for (Index i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

/// Built-in defaults per experiment kind.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.id = to_string(kind);
  switch (kind) {
    case ExperimentKind::ce_vs_p:
    case ExperimentKind::theory_table:
      break;
    case ExperimentKind::ambient_span:
      c.m = 200;
      c.dims.assign(10, 20);
      c.counts.assign(10, 60);
      c.arrangement = ArrangementMode::gaussian_partition;
      c.r = 0;
      c.projections = {ProjectionKind::gaussian};
      c.p_grid = {10, 20, 30, 40, 60, 80, 100, 150, 200};
      c.trials = 5;
      break;
    case ExperimentKind::phase_diagram:
      c.m = 100;
      c.dims = {10, 10};
      c.counts = {30, 30};
      c.arrangement = ArrangementMode::orthogonal;
      c.r = 0;
      c.projections = {ProjectionKind::gaussian};
      c.p_grid = {10, 13, 16, 20, 25, 31, 40, 49, 63, 80, 100};
      c.sigmas = linspace(0.0, 2.0, 21);
      c.trials = 20;
      break;
    case ExperimentKind::cluster_file:
      c.projections = {ProjectionKind::gaussian};
      c.p_grid = {32};
      c.trials = 1;
      c.select_params = false;
      break;
  }
  return c;
}

namespace detail {

template <class T>
std::vector<T> as_list(const nlohmann::json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

}  // namespace detail

/// Overlays JSON keys on `base`. Unknown keys are rejected.
inline ExperimentConfig apply_json(ExperimentConfig c, const nlohmann::json& j) {
  using nlohmann::json;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "id", "m", "L", "d", "dims", "arrangement", "r", "n", "counts", "sigma",
      "projections", "p", "algorithms", "q_grid", "lambda_grid", "smax_grid", "select_params",
      "omp_residual_tol", "admm", "kmeans", "estimate_L", "L_max", "trials", "seed", "threads",
      "timings", "out", "phase_curve", "c_tilde", "tau", "max_aff", "data", "labels", "normalize",
      "clusters"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  try {
    if (j.contains("experiment")) {
      const auto kind = parse_experiment_kind(j["experiment"].get<std::string>());
      if (kind != c.kind) {
        c = default_config(kind);
      }
    }
    if (j.contains("id")) c.id = j["id"].get<std::string>();
    if (j.contains("m")) c.m = j["m"].get<Index>();
    Index num_sub = c.num_subspaces();
    if (j.contains("L")) num_sub = j["L"].get<Index>();
    if (j.contains("dims")) {
      c.dims = j["dims"].get<std::vector<Index>>();
      num_sub = static_cast<Index>(c.dims.size());
    } else if (j.contains("d") || j.contains("L")) {
      const Index d = j.contains("d") ? j["d"].get<Index>() : c.d_max();
      c.dims.assign(static_cast<std::size_t>(num_sub), d);
    }
    if (j.contains("counts")) {
      c.counts = j["counts"].get<std::vector<Index>>();
    } else if (j.contains("n") || static_cast<Index>(c.counts.size()) != num_sub) {
      const Index n = j.contains("n") ? j["n"].get<Index>() : (c.counts.empty() ? 1 : c.counts.front());
      c.counts.assign(static_cast<std::size_t>(num_sub), n);
    }
    if (j.contains("arrangement")) c.arrangement = parse_arrangement_mode(j["arrangement"].get<std::string>());
    if (j.contains("r")) c.r = j["r"].get<Index>();
    if (j.contains("sigma")) c.sigmas = detail::as_list<double>(j["sigma"]);
    if (j.contains("projections")) {
      c.projections.clear();
      for (const auto& s : detail::as_list<std::string>(j["projections"]))
        c.projections.push_back(parse_projection_kind(s));
    }
    if (j.contains("p")) c.p_grid = detail::as_list<Index>(j["p"]);
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& s : detail::as_list<std::string>(j["algorithms"])) c.algorithms.push_back(parse_algorithm(s));
    }
    if (j.contains("q_grid")) c.q_grid = detail::as_list<double>(j["q_grid"]);
    if (j.contains("lambda_grid")) c.lambda_grid = detail::as_list<double>(j["lambda_grid"]);
    if (j.contains("smax_grid")) c.smax_grid = detail::as_list<double>(j["smax_grid"]);
    if (j.contains("select_params")) c.select_params = j["select_params"].get<bool>();
    if (j.contains("omp_residual_tol")) c.omp_residual_tol = j["omp_residual_tol"].get<double>();
    if (j.contains("admm")) {
      const auto& a = j["admm"];
      c.admm.rho = a.value("rho", c.admm.rho);
      c.admm.abs_tol = a.value("abs_tol", c.admm.abs_tol);
      c.admm.rel_tol = a.value("rel_tol", c.admm.rel_tol);
      c.admm.max_iter = a.value("max_iter", c.admm.max_iter);
    }
    if (j.contains("kmeans")) {
      const auto& k = j["kmeans"];
      c.kmeans.restarts = k.value("restarts", c.kmeans.restarts);
      c.kmeans.iterations = k.value("iterations", c.kmeans.iterations);
    }
    if (j.contains("estimate_L")) c.estimate_L = j["estimate_L"].get<bool>();
    if (j.contains("L_max")) c.L_max = j["L_max"].get<Index>();
    if (j.contains("trials")) c.trials = j["trials"].get<Index>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("timings")) c.timings = j["timings"].get<bool>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("phase_curve")) {
      const auto v = j["phase_curve"].get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("phase_curve needs three constants [c1, c2, c3]");
      c.phase_curve = {v[0], v[1], v[2]};
    }
    if (j.contains("c_tilde")) c.c_tilde = j["c_tilde"].get<double>();
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("max_aff")) c.max_aff = j["max_aff"].get<double>();
    if (j.contains("data")) c.data_path = j["data"].get<std::string>();
    if (j.contains("labels")) c.labels_path = j["labels"].get<std::string>();
    if (j.contains("normalize")) c.normalize = j["normalize"].get<bool>();
    if (j.contains("clusters")) c.clusters = j["clusters"].get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
}

/// Rejects configurations the runners cannot execute.
inline void validate(const ExperimentConfig& c) {
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.algorithms.empty() && c.kind != ExperimentKind::theory_table) throw ConfigError("no algorithms configured");
  if (c.p_grid.empty()) throw ConfigError("p grid is empty");
  for (double s : c.sigmas)
    if (!(s >= 0.0)) throw ConfigError("sigma values must be >= 0");
  if (c.sigmas.empty()) throw ConfigError("sigma grid is empty");
  for (Algorithm a : c.algorithms)
    if (c.grid_for(a).empty()) throw ConfigError("empty parameter grid for " + to_string(a));
  if (c.kind == ExperimentKind::cluster_file) {
    if (c.data_path.empty()) throw ConfigError("cluster_file requires 'data'");
    return;
  }
  if (c.dims.empty() || c.counts.size() != c.dims.size())
    throw ConfigError("dims and counts must have one entry per subspace");
  for (Index p : c.p_grid) {
    if (p < 1) throw ConfigError("p values must be >= 1");
    if (p > c.m) throw ConfigError("p values must not exceed m (p=" + std::to_string(p) + ")");
  }
  if (c.projections.empty()) throw ConfigError("no projection kinds configured");
}

}  // namespace rpsc::bench
