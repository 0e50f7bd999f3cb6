#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hf/curvature.hpp"
#include "hf/framing.hpp"

namespace hf {

enum class Integrator { rk4, euler };
enum class StepControl { fixed, halving };

std::string_view to_string(Integrator i);
std::string_view to_string(StepControl s);
Integrator integrator_from_string(std::string_view name);
StepControl step_control_from_string(std::string_view name);

struct FlowParams {
  double dt = 1e-3;
  double t_max = 1.0;
  std::size_t max_steps = 1'000'000;
  double tol_H = 1e-5;
  double tol_drift = 1e-6;
  std::size_t window = 10;
  Contraction contraction = Contraction::div_k;
  Integrator integrator = Integrator::rk4;
  StepControl step_control = StepControl::fixed;

  /// Record a trace sample every this many accepted steps (and at the end).
  std::size_t sample_stride = 1;
  /// Keep a(t) at every this many samples; 0 keeps only the first and last.
  std::size_t snapshot_stride = 0;
  /// Wigner band limit applied to the right-hand side; 0 picks
  /// BandLimiter::auto_band, negative disables the projection.
  int band_limit = 0;

  double det_floor = 1e-6;
  double blowup_ceiling = 1e8;
  /// Halving gives up below dt / 2^max_halvings.
  int max_halvings = 10;
  /// A step whose largest entry change exceeds this is retried at dt/2
  /// when step_control = halving.
  double max_increment = 0.25;

  /// Throws InvalidArgument when an invariant (dt > 0, tolerances > 0,
  /// window >= 2, ...) fails.
  void validate() const;
};

enum class FlowOutcome { completed, positivity_lost, blowup, step_limit };
std::string_view to_string(FlowOutcome o);

struct FlowSample {
  double t = 0.0;
  double dt = 0.0;
  double sup_H = 0.0;
  double l2_H = 0.0;
  double sup_R = 0.0;
  double l2_R = 0.0;
  int deg_a = 0;
  double deg_raw = 0.0;
  /// sup over nodes of |C - mean C|.
  double c_drift = 0.0;
  /// sup |A(t) - A(t_prev)| / sup |A(t_prev)| against the previous sample.
  double a_drift = 0.0;
};

struct FlowTrace {
  explicit FlowTrace(Framing w0) : initial(std::move(w0)) {}

  Framing initial;
  std::string form = "framing";
  std::vector<FlowSample> samples;
  /// a(t) keyed by sample index.
  std::map<std::size_t, GaugeField> snapshots;
  FlowOutcome outcome = FlowOutcome::completed;
  double error_time = 0.0;
  std::optional<std::size_t> error_node;
  std::string message;
  std::size_t steps = 0;

  const GaugeField& final_gauge() const { return snapshots.rbegin()->second; }
  Framing final_framing() const { return gauge_apply(initial, final_gauge()); }
};

struct ConvergenceReport {
  bool converged = false;
  std::optional<double> t_prime;
  std::optional<Framing> limit;
  double final_sup_H = 0.0;
  double final_sup_R = 0.0;
  bool orbit_preserved = true;
};

/// dA/dt = H A per node with H = h_tensor(w, contraction); no filtering.
MatrixField hf_rhs(const Framing& w, Contraction contraction);

/// Method-of-lines integrator for the homogeneous flow on a fixed grid.
class HomogeneousFlow {
 public:
  HomogeneousFlow(GridPtr grid, FlowParams params);
  ~HomogeneousFlow();

  const FlowParams& params() const { return params_; }
  /// Band actually used, or -1 when the projection is off.
  int band() const;

  /// Right-hand side of the framing form, band limited.
  MatrixField framing_rhs(const MatrixField& a) const;

  /// Framing form: evolves A with dA/dt = P(H A).
  FlowTrace integrate(const Framing& w0) const;
  /// Gauge form: evolves a with da/dt = A0^{-1} P(H(A0 a) A0 a), a(0) = Id.
  FlowTrace integrate_gauge(const Framing& w0) const;

  /// One step of the configured integrator on the framing form.
  MatrixField step(const MatrixField& a, double dt) const;

 private:
  struct Impl;
  GridPtr grid_;
  FlowParams params_;
  std::unique_ptr<Impl> impl_;
};

FlowTrace integrate_flow(const Framing& w0, const FlowParams& params);
FlowTrace integrate_flow_gauge(const Framing& w0, const FlowParams& params);

ConvergenceReport detect_convergence(const FlowTrace& trace, const FlowParams& params);

/// CSV with header t,sup_H,l2_H,sup_R,l2_R,deg_a,c_drift.
std::string trace_csv(const FlowTrace& trace);

}  // namespace hf
