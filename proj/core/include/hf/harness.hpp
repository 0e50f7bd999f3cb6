#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hf/analysis.hpp"
#include "hf/flow.hpp"
#include "hf/topology.hpp"

namespace hf {

/// Which integration paths a run uses. The framing form always supplies the
/// reported trace; `both` also integrates the gauge form as a cross-check.
enum class FlowForms { framing, gauge, both };
std::string_view to_string(FlowForms f);
FlowForms flow_forms_from_string(std::string_view name);

/// One experiment. Text form is flat `key = value` lines; `#` starts a
/// comment. Keys:
///
///   grid            n_alpha,n_beta,n_gamma          (16,16,32)
///   side            left | right                    (left)
///   twist           integer k                       (0)
///   seed            unsigned integer                (42)
///   eps             perturbation amplitude >= 0     (0)
///   cutoff          monomial degree of the perturbation (2)
///   forms           framing | gauge | both          (framing)
///   output_dir      run directory                   (run)
///   llg_tol         constancy tolerance on a limit  (1e-3)
///   tol_k           Killing-form tolerance          (1e-8)
///   defect_left     +2 or -2; the right orbit gets the opposite sign (2)
///
/// and the FlowParams fields under their own names: dt, t_max, max_steps,
/// tol_H, tol_drift, window, contraction, integrator, step_control,
/// sample_stride, snapshot_stride, band_limit, det_floor, blowup_ceiling,
/// max_halvings, max_increment.
struct ExperimentConfig {
  std::array<int, 3> grid{16, 16, 32};
  Side side = Side::left;
  int twist = 0;
  std::uint64_t seed = 42;
  double eps = 0.0;
  int cutoff = 2;
  FlowForms forms = FlowForms::framing;
  std::filesystem::path output_dir = "run";
  double llg_tol = 1e-3;
  double tol_k = 1e-8;
  int defect_left = 2;
  FlowParams flow;

  /// Original text when parsed from a file, echoed verbatim into the run.
  std::string source;

  /// Throws InvalidArgument on unknown or duplicate keys and bad values.
  static ExperimentConfig parse(const std::string& text);
  /// Reads and parses; IoError when the file cannot be read.
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Canonical text with every key; parse(serialize()) round-trips.
  std::string serialize() const;
  void validate() const;
};

/// exp(eps * s) with s a smooth matrix field whose entries are seeded random
/// combinations of quaternion-coordinate monomials of degree <= cutoff,
/// normalized to sup-norm 1. Deterministic in (grid, seed, eps, cutoff).
GaugeField random_deformation(const GridPtr& grid, std::uint64_t seed, double eps, int cutoff);

enum class RunOutcome { converged, not_converged, error };
std::string_view to_string(RunOutcome o);

struct RunArtifact {
  explicit RunArtifact(ExperimentConfig c) : config(std::move(c)) {}

  ExperimentConfig config;
  RunOutcome outcome = RunOutcome::error;
  std::string message;
  OrbitClass orbit;
  DefectValue defect;
  std::optional<FlowTrace> trace;
  std::optional<FlowTrace> gauge_trace;
  /// sup over shared samples of |w0 a_gauge - w_framing| when both forms ran.
  std::optional<double> form_gap;
  std::optional<ConvergenceReport> convergence;
  std::optional<LieLimitReport> lie;
  int band = -1;
  double wall_seconds = 0.0;
};

/// Builds, perturbs, integrates and analyzes one configuration. Flow
/// failures become error outcomes; nothing is written.
RunArtifact run_experiment(const ExperimentConfig& config);

/// Writes config.txt, meta.json, trace.csv (and trace_gauge.csv),
/// report.json, metrics.json, final.bin and limit.bin (when converged) into
/// config.output_dir. Throws IoError.
void write_artifact(const RunArtifact& artifact);

/// run_experiment followed by write_artifact.
RunArtifact run_and_persist(const ExperimentConfig& config);

struct SweepRow {
  Side side = Side::left;
  int twist = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  RunOutcome outcome = RunOutcome::error;
  std::optional<double> t_prime;
  std::optional<double> sup_R_final;
  std::optional<LieClass> lie_class;
};

SweepRow summarize(const RunArtifact& artifact);

/// header side,twist,eps,seed,outcome,t_prime,sup_R_final,class
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Runs every config (up to `jobs` at a time), persisting each run.
/// A run that throws is recorded as an error row. Throws InvalidArgument
/// for an empty list.
std::vector<RunArtifact> sweep(const std::vector<ExperimentConfig>& configs, unsigned jobs = 1);

/// Quadrature, bracket and degree calibration at one resolution.
struct CalibrationReport {
  std::array<int, 3> grid{};
  double volume = 0.0;
  double volume_error = 0.0;
  double left_bracket_error = 0.0;
  double right_bracket_error = 0.0;
  double degree_calibration = 0.0;
  DegreeResult covering_map;
  std::array<DegreeResult, 2> twists;  // k = -1, 2
  int right_orbit_degree = 0;
  int band = 0;
};

CalibrationReport calibrate(const std::array<int, 3>& grid);

/// JSON renderings shared by the run directory and the command line.
std::string calibration_json(const CalibrationReport& r);
std::string report_json(const RunArtifact& a);
std::string lie_report_json(const LieLimitReport& r);

}  // namespace hf
