// hf: command-line front end for the homogeneous-flow laboratory.
//
//   hf calibrate --grid A,B,C
//   hf run --config FILE
//   hf sweep --configs DIR [--out DIR] [--jobs N]
//   hf degree --field FILE
//   hf analyze --framing FILE [--tol T]
//   hf export --out FILE [--grid A,B,C] [--side S] [--twist K] [--eps E] [--seed N] [--gauge]
//
// Exit codes: 0 completed (whatever the flow did), 2 invalid configuration
// or input, 3 I/O failure.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hf/analysis.hpp"
#include "hf/errors.hpp"
#include "hf/harness.hpp"
#include "hf/io.hpp"
#include "hf/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kIo = 3;

std::array<int, 3> grid_of(const std::string& text) {
  // Reuse the config parser so the accepted syntax is identical.
  return hf::ExperimentConfig::parse("grid = " + text + "\n").grid;
}

hf::GridPtr grid_for(const hf::FieldFile& f) { return hf::build_grid(f.grid[0], f.grid[1], f.grid[2]); }

int cmd_calibrate(const std::string& grid) {
  std::cout << hf::calibration_json(hf::calibrate(grid_of(grid)));
  return kOk;
}

int cmd_run(const fs::path& config) {
  const hf::RunArtifact a = hf::run_and_persist(hf::ExperimentConfig::load(config));
  std::cout << hf::report_json(a);
  std::cerr << "run directory: " << a.config.output_dir.string() << "\n";
  return kOk;
}

int cmd_sweep(const fs::path& dir, const fs::path& out, unsigned jobs) {
  if (!fs::is_directory(dir)) throw hf::IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw hf::InvalidArgument("no *.cfg files in '" + dir.string() + "'");

  // Validate everything before running anything.
  std::vector<hf::ExperimentConfig> configs;
  for (const auto& f : files) {
    try {
      configs.push_back(hf::ExperimentConfig::load(f));
    } catch (const hf::InvalidArgument& e) {
      throw hf::InvalidArgument(f.filename().string() + ": " + e.what());
    }
    configs.back().output_dir = out / f.stem();
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw hf::IoError("cannot create '" + out.string() + "'");

  std::vector<hf::SweepRow> rows;
  for (const auto& a : hf::sweep(configs, jobs)) rows.push_back(hf::summarize(a));
  const std::string csv = hf::sweep_csv(rows);
  hf::write_text_file(out / "summary.csv", csv);
  std::cout << csv;
  return kOk;
}

int cmd_degree(const fs::path& path) {
  const hf::FieldFile file = hf::read_field(path);
  const hf::GridPtr grid = grid_for(file);
  const hf::GaugeField a(grid, hf::unpack_matrix(file, *grid));
  const double defect = a.orthogonality_defect();
  const bool projected = defect > 1e-8;
  const hf::DegreeResult d = projected ? hf::gauge_degree(a) : hf::degree(a);
  const json out{{"grid", file.grid},
                 {"raw", d.raw},
                 {"rounded", d.rounded},
                 {"calibration", d.calibration},
                 {"orthogonality_defect", defect},
                 {"polar_projected", projected}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_analyze(const fs::path& path, double tol, double tol_k) {
  const hf::FieldFile file = hf::read_field(path);
  const hf::GridPtr grid = grid_for(file);
  const hf::Framing w(grid, hf::unpack_matrix(file, *grid));
  const hf::LieLimitReport lie = hf::analyze_limit(w, tol, tol_k);
  const hf::CurvatureBundle cb = hf::curvature_bundle(w);
  const hf::FieldNorms r = hf::field_norms(*grid, cb.curvature);
  const hf::FieldNorms h = hf::field_norms(*grid, hf::contract(cb.curvature, hf::Contraction::div_k));
  const int deg = hf::gauge_degree(hf::relative_gauge(hf::reference_left_framing(grid), w)).rounded;
  const hf::OrbitClass orbit = hf::classify_orbit(deg, hf::right_orbit_degree(grid));
  json out{{"grid", file.grid},
           {"lie", json::parse(hf::lie_report_json(lie))},
           {"sup_R", r.sup},
           {"l2_R", r.l2},
           {"sup_H", h.sup},
           {"l2_H", h.l2},
           {"orbit", {{"degree", orbit.degree}, {"label", orbit.describe()}}}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_export(const fs::path& out, const std::string& grid_text, const std::string& side, int twist, double eps,
               std::uint64_t seed, bool gauge) {
  const auto counts = grid_of(grid_text);
  const hf::GridPtr grid = hf::build_grid(counts[0], counts[1], counts[2]);
  auto [canonical, orbit] = hf::canonical_framing(grid, hf::side_from_string(side), twist);
  const hf::GaugeField a = hf::random_deformation(grid, seed, eps, 2);
  const hf::Framing w = hf::gauge_apply(canonical, a);
  const hf::MatrixField m =
      gauge ? hf::relative_gauge(hf::reference_left_framing(grid), w).matrices() : w.matrices();
  hf::write_field(out, hf::pack(*grid, m), hf::encoding_for(out));
  std::cerr << "wrote " << (gauge ? "gauge" : "framing") << " field in orbit " << orbit.describe() << " to " << out.string()
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous flow of framings on S^3"};
  app.require_subcommand(1);

  std::string grid = "16,16,32";
  auto* calibrate = app.add_subcommand("calibrate", "quadrature, bracket and degree calibration report");
  calibrate->add_option("--grid", grid, "n_alpha,n_beta,n_gamma")->capture_default_str();

  fs::path config;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config, "flat key = value file")->required();

  fs::path configs, sweep_out = "sweep";
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run every *.cfg in a directory");
  sweep->add_option("--configs", configs, "directory of configs")->required();
  sweep->add_option("--out", sweep_out, "directory for run folders and summary.csv")->capture_default_str();
  sweep->add_option("--jobs", jobs, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);

  fs::path field;
  auto* degree = app.add_subcommand("degree", "degree of a rotation or gauge field");
  degree->add_option("--field", field, "field container file")->required();

  fs::path framing;
  double tol = 1e-3, tol_k = 1e-8;
  auto* analyze = app.add_subcommand("analyze", "local Lie group test and classification of a framing");
  analyze->add_option("--framing", framing, "field container file")->required();
  analyze->add_option("--tol", tol, "constancy tolerance")->capture_default_str();
  analyze->add_option("--tol-k", tol_k, "Killing-form tolerance")->capture_default_str();

  fs::path export_out;
  std::string side = "left";
  int twist = 0;
  double eps = 0.0;
  std::uint64_t seed = 42;
  bool gauge = false;
  auto* exporter = app.add_subcommand("export", "write a canonical (optionally perturbed) framing");
  exporter->add_option("--out", export_out, "output file (.json for JSON)")->required();
  exporter->add_option("--grid", grid, "n_alpha,n_beta,n_gamma")->capture_default_str();
  exporter->add_option("--side", side)->capture_default_str();
  exporter->add_option("--twist", twist)->capture_default_str();
  exporter->add_option("--eps", eps)->capture_default_str();
  exporter->add_option("--seed", seed)->capture_default_str();
  exporter->add_flag("--gauge", gauge, "write the gauge relative to the left framing instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*calibrate) return cmd_calibrate(grid);
    if (*run) return cmd_run(config);
    if (*sweep) return cmd_sweep(configs, sweep_out, jobs);
    if (*degree) return cmd_degree(field);
    if (*analyze) return cmd_analyze(framing, tol, tol_k);
    if (*exporter) return cmd_export(export_out, grid, side, twist, eps, seed, gauge);
  } catch (const hf::IoError& e) {
    std::cerr << "hf: " << e.what() << "\n";
    return kIo;
  } catch (const hf::FormatError& e) {
    std::cerr << "hf: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    // InvalidArgument, singular or unresolvable input.
    std::cerr << "hf: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
