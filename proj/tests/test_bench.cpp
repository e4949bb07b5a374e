#include "rpsc/bench/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace rpsc;
using namespace rpsc::bench;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rpsc_test_" + std::to_string(std::hash<std::string>{}(
                               ::testing::UnitTest::GetInstance()->current_test_info()->name())));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

ExperimentConfig small_config() {
  ExperimentConfig c = default_config(ExperimentKind::ce_vs_p);
  c.id = "small";
  c.m = 60;
  c.dims = {5, 5, 5};
  c.counts = {20, 20, 20};
  c.r = 1;
  c.p_grid = {10, 30};
  c.trials = 2;
  c.q_grid = {3, 5};
  c.lambda_grid = {0.05};
  c.smax_grid = {5};
  c.timings = false;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- dataset files

TEST(DatasetIo, CsvRoundTripIsExact) {
  TempDir dir;
  Rng rng(1);
  Matrix x = gaussian_matrix(7, 13, 1.0, rng);
  x(0, 0) = 1e-300;
  x(1, 0) = -0.1;
  save_points_csv(dir.file("a.csv"), x);
  const Matrix y = load_points(dir.file("a.csv"));
  ASSERT_EQ(y.rows(), 7);
  ASSERT_EQ(y.cols(), 13);
  EXPECT_TRUE(x == y);
}

TEST(DatasetIo, BinaryRoundTripIsExact) {
  TempDir dir;
  Rng rng(2);
  const Matrix x = gaussian_matrix(5, 9, 3.0, rng);
  save_points_binary(dir.file("a.bin"), x);
  EXPECT_TRUE(is_binary_dataset(dir.file("a.bin")));
  EXPECT_EQ(fs::file_size(dir.file("a.bin")), 24u + 8u * 45u);
  EXPECT_TRUE(load_points(dir.file("a.bin")) == x);
}

TEST(DatasetIo, MalformedInputs) {
  TempDir dir;
  write_text(dir.file("bad.csv"), "1,2,3\n4,x,6\n");
  EXPECT_THROW(load_points_csv(dir.file("bad.csv")), ParseError);
  write_text(dir.file("ragged.csv"), "1,2,3\n4,5\n");
  EXPECT_THROW(load_points_csv(dir.file("ragged.csv")), ParseError);
  write_text(dir.file("empty.csv"), "\n\n");
  EXPECT_THROW(load_points_csv(dir.file("empty.csv")), ParseError);
  write_text(dir.file("magic.bin"), std::string("DRSX\1\0\0\0", 8));
  EXPECT_THROW(load_points_binary(dir.file("magic.bin")), ParseError);
  save_points_binary(dir.file("trunc.bin"), Matrix::Ones(3, 4));
  fs::resize_file(dir.file("trunc.bin"), 24 + 8 * 5);
  EXPECT_THROW(load_points_binary(dir.file("trunc.bin")), ParseError);
  EXPECT_THROW(load_points(dir.file("missing.csv")), ParseError);
}

TEST(DatasetIo, Labels) {
  TempDir dir;
  save_labels(dir.file("l.txt"), {0, 2, 1, 1});
  EXPECT_EQ(load_labels(dir.file("l.txt"), 4), (std::vector<int>{0, 2, 1, 1}));
  EXPECT_THROW(load_labels(dir.file("l.txt"), 5), ParseError);
  write_text(dir.file("bad.txt"), "0\n1.5\n");
  EXPECT_THROW(load_labels(dir.file("bad.txt")), ParseError);
}

// ---------------------------------------------------------------- config

TEST(Config, JsonOverlay) {
  const auto c = apply_json(default_config(ExperimentKind::ce_vs_p),
                            nlohmann::json::parse(R"({"m": 100, "L": 2, "d": 7, "n": 30, "p": [10, 20],
                                                       "projections": ["fast_dft"], "algorithms": "tsc"})"));
  EXPECT_EQ(c.m, 100);
  EXPECT_EQ(c.dims, (std::vector<Index>{7, 7}));
  EXPECT_EQ(c.counts, (std::vector<Index>{30, 30}));
  EXPECT_EQ(c.p_grid, (std::vector<Index>{10, 20}));
  EXPECT_EQ(c.projections, std::vector<ProjectionKind>{ProjectionKind::fast_dft});
  EXPECT_EQ(c.algorithms, std::vector<Algorithm>{Algorithm::tsc});
  const auto phase = apply_json(default_config(ExperimentKind::ce_vs_p), nlohmann::json::parse(R"({"experiment": "phase"})"));
  EXPECT_EQ(phase.kind, ExperimentKind::phase_diagram);
  EXPECT_EQ(phase.m, 100);
}

TEST(Config, Errors) {
  const auto base = default_config(ExperimentKind::ce_vs_p);
  EXPECT_THROW(apply_json(base, nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(apply_json(base, nlohmann::json::parse(R"({"m": "big"})")), ConfigError);
  EXPECT_THROW(apply_json(base, nlohmann::json::parse(R"({"phase_curve": [1, 2]})")), ConfigError);
  EXPECT_THROW(apply_json(base, nlohmann::json::parse(R"({"algorithms": ["kmeans"]})")), ConfigError);
  auto c = base;
  c.q_grid.clear();
  EXPECT_THROW(validate(c), ConfigError);
  c = base;
  c.p_grid = {5000};
  EXPECT_THROW(validate(c), ConfigError);
  c = base;
  c.trials = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = default_config(ExperimentKind::cluster_file);
  EXPECT_THROW(validate(c), ConfigError);
}

// ---------------------------------------------------------------- parameter selection

TEST(Selection, SingletonGridAndErrors) {
  const ExperimentConfig c = small_config();
  const Dataset ds = make_trial_dataset(c, 0);
  EXPECT_EQ(select_params(ds, Algorithm::tsc, {4}, c, 1).best, 4.0);
  EXPECT_THROW(select_params(ds, Algorithm::tsc, {}, c, 1), ConfigError);
  Dataset unlabeled = ds;
  unlabeled.labels.clear();
  EXPECT_THROW(select_params(unlabeled, Algorithm::tsc, {4}, c, 1), UsageError);
}

TEST(Selection, PicksLowestErrorThenSmallest) {
  const ExperimentConfig c = small_config();
  const Dataset ds = make_trial_dataset(c, 0);
  const auto sel = select_params(ds, Algorithm::sscomp, {100, 5, 3, 1000}, c, 2);
  EXPECT_EQ(sel.ce[0], 1.0);  // s_max beyond N - 1 is skipped
  EXPECT_EQ(sel.ce[3], 1.0);
  const double best_ce = *std::min_element(sel.ce.begin(), sel.ce.end());
  for (std::size_t g = 0; g < sel.grid.size(); ++g)
    if (sel.ce[g] == best_ce) {
      EXPECT_LE(sel.best, sel.grid[g]);
    }
}

// ---------------------------------------------------------------- runners

TEST(Runner, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = small_config();
  c.estimate_L = true;
  const RunOutput a = run_ce_vs_p(c);
  c.threads = 3;
  const RunOutput b = run_ce_vs_p(c);
  EXPECT_EQ(results_csv_string(a.rows), results_csv_string(b.rows));
  EXPECT_EQ(a.selected, b.selected);
  // trials x (gaussian, fast_dft) x |p| x algorithms x (oracle, eigengap)
  EXPECT_EQ(a.rows.size(), 2u * 2u * 2u * 3u * 2u);
  for (const auto& r : a.rows) {
    ASSERT_TRUE(r.ce.has_value());
    EXPECT_GE(*r.ce, 0.0);
    EXPECT_LE(*r.ce, 1.0);
    EXPECT_EQ(r.t_total, 0.0);
  }
}

TEST(Runner, IdentityRunsOnceAtAmbientDimension) {
  ExperimentConfig c = small_config();
  c.projections = {ProjectionKind::identity};
  c.trials = 1;
  const RunOutput out = run_ce_vs_p(c);
  ASSERT_EQ(out.rows.size(), 3u);
  for (const auto& r : out.rows) EXPECT_EQ(r.p, c.m);
}

TEST(Runner, ClusterFileReproducesSyntheticIdentity) {
  TempDir dir;
  ExperimentConfig c = small_config();
  c.projections = {ProjectionKind::identity};
  c.trials = 1;
  c.select_params = false;
  const RunOutput synth = run_ce_vs_p(c);

  const Dataset ds = make_trial_dataset(c, 0);
  save_points_csv(dir.file("pts.csv"), ds.points);
  save_labels(dir.file("pts.labels"), ds.labels);
  ExperimentConfig f = c;
  f.kind = ExperimentKind::cluster_file;
  f.data_path = dir.file("pts.csv");
  f.labels_path = dir.file("pts.labels");
  const RunOutput file = cluster_file(f);
  ASSERT_EQ(file.rows.size(), synth.rows.size());
  for (std::size_t i = 0; i < synth.rows.size(); ++i) {
    EXPECT_EQ(file.rows[i].algorithm, synth.rows[i].algorithm);
    EXPECT_EQ(*file.rows[i].ce, *synth.rows[i].ce);
  }
  ASSERT_EQ(file.predictions.size(), 3u);
  EXPECT_EQ(file.predictions[0].name, "tsc_identity_p60_t0");

  const auto written = save_outputs(file, dir.file("run.csv"));
  EXPECT_TRUE(fs::exists(dir.file("run_summary.csv")));
  EXPECT_TRUE(fs::exists(dir.file("run_tsc_identity_p60_t0.labels")));
  EXPECT_EQ(load_labels(dir.file("run_tsc_identity_p60_t0.labels"), ds.size()), file.predictions[0].labels);
  EXPECT_EQ(written.size(), 5u);
}

TEST(Runner, ClusterFileWithoutLabelsEstimatesClusters) {
  TempDir dir;
  ExperimentConfig c = small_config();
  const Dataset ds = make_trial_dataset(c, 0);
  save_points_binary(dir.file("pts.bin"), ds.points);
  ExperimentConfig f = default_config(ExperimentKind::cluster_file);
  f.data_path = dir.file("pts.bin");
  f.algorithms = {Algorithm::sscomp};
  f.smax_grid = {5};
  const RunOutput out = cluster_file(f);
  ASSERT_EQ(out.rows.size(), 1u);
  EXPECT_EQ(out.rows[0].l_mode, "eigengap");
  EXPECT_FALSE(out.rows[0].ce.has_value());
  f.p_grid = {100};
  f.projections = {ProjectionKind::fast_dft};
  EXPECT_THROW(cluster_file(f), ConfigError);
}

TEST(Runner, PhaseCurveOverlay) {
  ExperimentConfig c = default_config(ExperimentKind::phase_diagram);
  c.trials = 1;
  c.p_grid = {10, 100};
  c.sigmas = {0.0};
  c.algorithms = {Algorithm::tsc};
  c.q_grid = {5};
  c.select_params = false;
  const RunOutput out = run_phase_diagram(c);
  ASSERT_EQ(out.curve.size(), 2u + 49u);
  // x = 1 at p = d; the curve meets sigma = 0 there.
  EXPECT_NEAR(out.curve[0].x, 1.0, 1e-15);
  ASSERT_TRUE(out.curve[0].sigma_star.has_value());
  EXPECT_NEAR(*out.curve[0].sigma_star, 0.0, 1e-12);
  for (const auto& s : out.curve) {
    if (!s.sigma_star) continue;
    const auto [c1, c2, c3] = c.phase_curve;
    EXPECT_NEAR(s.x * (c1 + *s.sigma_star * (c2 + *s.sigma_star)), c3, 1e-10);
  }
  std::ostringstream os;
  write_curve_csv(os, out.curve);
  EXPECT_EQ(os.str().substr(0, 14), "x,p,sigma_star");
}

// ---------------------------------------------------------------- theory table

TEST(TheoryTable, AllUnsatisfiedAtFullAffinity) {
  ExperimentConfig c = default_config(ExperimentKind::theory_table);
  c.max_aff = 1.0;
  c.sigmas = {0.0, 0.5};
  c.p_grid = {8, 4096};
  const auto rows = run_theory_table(c);
  ASSERT_EQ(rows.size(), 2u * 6u);
  for (const auto& r : rows) EXPECT_FALSE(r.report.satisfied) << r.report.condition << " p=" << r.p;
}

TEST(TheoryTable, NoisyAtZeroSigmaEqualsNoiseless) {
  ExperimentConfig c = default_config(ExperimentKind::theory_table);
  c.max_aff = 0.3;
  c.sigmas = {0.0};
  c.p_grid = {64, 1024};
  const auto rows = run_theory_table(c);
  for (std::size_t i = 0; i < rows.size(); i += 5) {
    const auto& tsc = rows[i].report;
    const auto& noisy = rows[i + 3].report;
    EXPECT_EQ(tsc.lhs, noisy.lhs);
    EXPECT_EQ(tsc.rhs, noisy.rhs);
    EXPECT_EQ(tsc.satisfied, noisy.satisfied);
  }
  std::ostringstream os;
  write_theory_csv(os, rows);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(rows.size() + 1));
}

TEST(TheoryTable, MeasuredAffinityForSharedIntersection) {
  ExperimentConfig c = default_config(ExperimentKind::theory_table);
  c.m = 200;
  c.p_grid = {50};
  const auto rows = run_theory_table(c);
  // four shared directions out of twenty
  EXPECT_GE(rows[0].report.inputs.max_aff, std::sqrt(4.0 / 20.0) - 1e-12);
}
