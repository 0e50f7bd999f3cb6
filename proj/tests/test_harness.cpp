#include <filesystem>

#include <gtest/gtest.h>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "hf/errors.hpp"
#include "hf/harness.hpp"
#include "hf/io.hpp"

namespace hf {
namespace {

namespace fs = std::filesystem;

class Harness : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("hf_harness_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  // Small, fast configuration on the coarse grid.
  ExperimentConfig quick(const std::string& name, const std::string& extra = "") const {
    return ExperimentConfig::parse("grid = 8,8,16\nt_max = 0.02\nsample_stride = 5\noutput_dir = " +
                                   (dir / name).string() + "\n" + extra);
  }

  fs::path dir;
};

TEST_F(Harness, ConfigDefaultsAndRoundTrip) {
  const ExperimentConfig d = ExperimentConfig::parse("");
  EXPECT_EQ(d.grid, (std::array<int, 3>{16, 16, 32}));
  EXPECT_EQ(d.side, Side::left);
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.flow.dt, 1e-3);
  EXPECT_EQ(d.flow.integrator, Integrator::rk4);

  const std::string text =
      "# comment line\n"
      "grid = 8, 8, 16\n"
      "side = right   # trailing comment\n"
      "twist = -2\n"
      "eps = 0.125\n"
      "seed = 7\n"
      "contraction = trace_i\n"
      "step_control = halving\n"
      "dt = 2.5e-4\n"
      "forms = both\n";
  const ExperimentConfig c = ExperimentConfig::parse(text);
  EXPECT_EQ(c.source, text);
  EXPECT_EQ(c.grid, (std::array<int, 3>{8, 8, 16}));
  EXPECT_EQ(c.side, Side::right);
  EXPECT_EQ(c.twist, -2);
  EXPECT_EQ(c.flow.contraction, Contraction::trace_i);
  EXPECT_EQ(c.forms, FlowForms::both);

  const ExperimentConfig again = ExperimentConfig::parse(c.serialize());
  EXPECT_EQ(again.serialize(), c.serialize());
  EXPECT_EQ(again.flow.dt, 2.5e-4);
  EXPECT_EQ(again.eps, 0.125);
}

TEST_F(Harness, ConfigRejectsBadInput) {
  EXPECT_THROW(ExperimentConfig::parse("colour = red\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("eps = 1\neps = 2\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("eps = -0.1\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("eps = abc\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("grid = 8,8\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("grid = 7,8,16\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("window = 1\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("just words\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("defect_left = 1\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::load(dir / "absent.cfg"), IoError);
}

TEST_F(Harness, RandomDeformation) {
  const GridPtr g = build_grid(8, 8, 16);
  for (const auto& m : random_deformation(g, 3, 0.0, 2).matrices()) EXPECT_EQ(m, Matrix3::Identity());

  const auto a = random_deformation(g, 11, 0.3, 2);
  const auto b = random_deformation(g, 11, 0.3, 2);
  const auto c = random_deformation(g, 12, 0.3, 2);
  for (std::size_t n = 0; n < g->size(); ++n) EXPECT_EQ(a.at(n), b.at(n));
  EXPECT_NE(a.at(0), c.at(0));

  // log a = eps s with sup |s| = 1.
  double sup_log = 0.0;
  for (const auto& m : a.matrices()) sup_log = std::max(sup_log, Matrix3(m.log()).norm());
  EXPECT_NEAR(sup_log, 0.3, 1e-9);

  const GridPtr fine = build_grid(16, 16, 32);
  for (std::uint64_t seed : {1u, 2u, 42u}) {
    for (double eps : {0.05, 0.5}) EXPECT_EQ(gauge_degree(random_deformation(fine, seed, eps, 3)).rounded, 0);
  }
  // Positive for any amplitude.
  for (const auto& m : random_deformation(g, 5, 4.0, 2).matrices()) EXPECT_GT(m.determinant(), 0.0);
  EXPECT_THROW(random_deformation(g, 1, -0.1, 2), InvalidArgument);
}

TEST_F(Harness, LieInitialConditionConvergesImmediately) {
  const ExperimentConfig cfg = quick("lie");
  const RunArtifact a = run_and_persist(cfg);
  EXPECT_EQ(a.outcome, RunOutcome::converged);
  ASSERT_TRUE(a.convergence);
  EXPECT_EQ(*a.convergence->t_prime, 0.0);
  ASSERT_TRUE(a.lie);
  EXPECT_EQ(a.lie->classification, LieClass::su2);
  for (double e : a.lie->killing_eigenvalues) EXPECT_NEAR(e, -8.0, 1e-9);
  EXPECT_NEAR(a.lie->mean_constants[sidx(2, 0, 1)], 2.0, 1e-12);
  EXPECT_EQ(a.orbit.label, OrbitClass::Label::left_canonical);
  EXPECT_EQ(*a.defect.value, 2);

  for (const char* f : {"config.txt", "meta.json", "trace.csv", "report.json", "metrics.json", "final.bin", "limit.bin"})
    EXPECT_TRUE(fs::exists(cfg.output_dir / f)) << f;
  EXPECT_EQ(read_text_file(cfg.output_dir / "config.txt"), cfg.source);

  const auto report = nlohmann::json::parse(read_text_file(cfg.output_dir / "report.json"));
  EXPECT_EQ(report["outcome"], "converged");
  EXPECT_EQ(report["lie"]["classification"], "su2");
  EXPECT_EQ(report["convergence"]["t_prime"], 0.0);
  const std::string csv = read_text_file(cfg.output_dir / "trace.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,sup_H,l2_H,sup_R,l2_R,deg_a,c_drift");
  const GridPtr g = build_grid(8, 8, 16);
  const MatrixField limit = unpack_matrix(read_field(cfg.output_dir / "limit.bin"), *g);
  EXPECT_EQ(limit[5], Matrix3::Identity());
  // Wall clock lives only in metrics.json.
  EXPECT_EQ(read_text_file(cfg.output_dir / "meta.json").find("wall"), std::string::npos);
}

TEST_F(Harness, BothFormsAndDeterminism) {
  const ExperimentConfig cfg = quick("both", "eps = 0.05\nforms = both\nsnapshot_stride = 1\n");
  const RunArtifact a = run_and_persist(cfg);
  ASSERT_TRUE(a.trace);
  ASSERT_TRUE(a.gauge_trace);
  ASSERT_TRUE(a.form_gap);
  EXPECT_LT(*a.form_gap, 1e-8);
  EXPECT_EQ(a.outcome, RunOutcome::not_converged);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "trace_gauge.csv"));
  EXPECT_FALSE(fs::exists(cfg.output_dir / "limit.bin"));

  ExperimentConfig twin = cfg;
  twin.output_dir = dir / "twin";
  run_and_persist(twin);
  for (const char* f : {"trace.csv", "trace_gauge.csv", "report.json", "final.bin"})
    EXPECT_EQ(read_text_file(cfg.output_dir / f), read_text_file(twin.output_dir / f)) << f;
}

TEST_F(Harness, ErrorRunsStillWriteConfigAndOutcome) {
  ExperimentConfig cfg = quick("bad", "eps = 0.3\ndt = 0.5\nintegrator = euler\nband_limit = -1\n");
  cfg.flow.t_max = 50.0;
  const RunArtifact a = run_and_persist(cfg);
  EXPECT_EQ(a.outcome, RunOutcome::error);
  EXPECT_FALSE(a.message.empty());
  EXPECT_TRUE(fs::exists(cfg.output_dir / "config.txt"));
  const auto report = nlohmann::json::parse(read_text_file(cfg.output_dir / "report.json"));
  EXPECT_EQ(report["outcome"], "error");
  EXPECT_TRUE(report["framing_flow"].contains("error_time"));
}

TEST_F(Harness, SweepRowsAndSchema) {
  std::vector<ExperimentConfig> cfgs = {quick("s0"), quick("s1", "eps = 0.05\n"), quick("s2", "eps = 0.05\n")};
  const auto runs = sweep(cfgs, 2);
  ASSERT_EQ(runs.size(), 3u);
  std::vector<SweepRow> rows;
  for (const auto& r : runs) rows.push_back(summarize(r));
  const std::string csv = sweep_csv(rows);
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "side,twist,eps,seed,outcome,t_prime,sup_R_final,class");
  EXPECT_EQ(lines[1].rfind("left,0,0,42,converged,0,", 0), 0u) << lines[1];
  EXPECT_EQ(lines[1].substr(lines[1].rfind(',') + 1), "su2");
  // Duplicate configs give identical rows.
  EXPECT_EQ(lines[2], lines[3]);
  EXPECT_THROW(sweep({}), InvalidArgument);
}

TEST_F(Harness, SweepRecordsFailuresPerRow) {
  write_text_file(dir / "blocker", "a file where a directory should go");
  ExperimentConfig blocked = quick("ok");
  blocked.output_dir = dir / "blocker" / "run";
  const auto runs = sweep({blocked, quick("ok")});
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].outcome, RunOutcome::error);
  EXPECT_NE(runs[0].message.find("cannot"), std::string::npos);
  EXPECT_EQ(runs[1].outcome, RunOutcome::converged);
}

TEST_F(Harness, ReferenceTwistsConvergeAtOnce) {
  // Both canonical orbits at zero amplitude, on a grid that resolves rho.
  const int dr = right_orbit_degree(build_grid(16, 16, 32));
  std::vector<ExperimentConfig> cfgs;
  for (int twist : {0, dr}) {
    cfgs.push_back(ExperimentConfig::parse("t_max = 0.01\ntwist = " + std::to_string(twist) +
                                           "\noutput_dir = " + (dir / ("t" + std::to_string(twist))).string() + "\n"));
  }
  for (const auto& r : sweep(cfgs)) {
    EXPECT_EQ(r.outcome, RunOutcome::converged) << r.message;
    EXPECT_EQ(*r.convergence->t_prime, 0.0);
    EXPECT_EQ(r.lie->classification, LieClass::su2);
  }
}

TEST(Calibration, ReportFields) {
  const CalibrationReport r = calibrate({16, 16, 32});
  EXPECT_LT(r.volume_error, 1e-8);
  EXPECT_LT(r.left_bracket_error, 1e-5);
  EXPECT_LT(r.right_bracket_error, 1e-5);
  EXPECT_EQ(r.covering_map.rounded, 1);
  EXPECT_EQ(r.twists[0].rounded, -1);
  EXPECT_EQ(r.twists[1].rounded, 2);
  EXPECT_EQ(std::abs(r.right_orbit_degree), 1);
  const auto j = nlohmann::json::parse(calibration_json(r));
  EXPECT_EQ(j["degree"]["covering_map"]["rounded"], 1);
}

}  // namespace
}  // namespace hf
