#include "hf/flow.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "hf/errors.hpp"
#include "hf/topology.hpp"

namespace hf {

std::string_view to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "euler"; }
std::string_view to_string(StepControl s) { return s == StepControl::fixed ? "fixed" : "halving"; }

Integrator integrator_from_string(std::string_view name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "euler") return Integrator::euler;
  throw InvalidArgument("unknown integrator '" + std::string(name) + "'");
}

StepControl step_control_from_string(std::string_view name) {
  if (name == "fixed") return StepControl::fixed;
  if (name == "halving") return StepControl::halving;
  throw InvalidArgument("unknown step control '" + std::string(name) + "'");
}

std::string_view to_string(FlowOutcome o) {
  switch (o) {
    case FlowOutcome::completed:
      return "completed";
    case FlowOutcome::positivity_lost:
      return "positivity_lost";
    case FlowOutcome::blowup:
      return "blowup";
    case FlowOutcome::step_limit:
      return "step_limit";
  }
  return "?";
}

void FlowParams::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(t_max >= 0.0)) throw InvalidArgument("t_max must be non-negative");
  if (!(tol_H > 0.0) || !(tol_drift > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (window < 2) throw InvalidArgument("window must be at least 2");
  if (max_steps == 0) throw InvalidArgument("max_steps must be positive");
  if (sample_stride == 0) throw InvalidArgument("sample_stride must be positive");
  if (!(det_floor > 0.0) || !(blowup_ceiling > 0.0)) throw InvalidArgument("det_floor and blowup_ceiling must be positive");
  if (max_halvings < 0) throw InvalidArgument("max_halvings must be non-negative");
}

MatrixField hf_rhs(const Framing& w, Contraction contraction) {
  const HField h = h_tensor(w, contraction);
  MatrixField out(h.size());
  for (std::size_t n = 0; n < h.size(); ++n) out[n] = h[n] * w.at(n);
  return out;
}

namespace {

void axpy(MatrixField& y, double s, const MatrixField& x) {
  for (std::size_t n = 0; n < y.size(); ++n) y[n] += s * x[n];
}

MatrixField plus(const MatrixField& y, double s, const MatrixField& x) {
  MatrixField out = y;
  axpy(out, s, x);
  return out;
}

double sup_entry(const MatrixField& f) {
  double m = 0.0;
  for (const auto& x : f) m = std::max(m, x.norm());
  return m;
}

double sup_difference(const MatrixField& a, const MatrixField& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, (a[n] - b[n]).norm());
  return m;
}

bool all_finite(const MatrixField& f) {
  for (const auto& x : f) {
    if (!x.allFinite()) return false;
  }
  return true;
}

}  // namespace

struct HomogeneousFlow::Impl {
  std::unique_ptr<BandLimiter> limiter;
  double degree_calibration = 0.0;
};

HomogeneousFlow::HomogeneousFlow(GridPtr grid, FlowParams params)
    : grid_{std::move(grid)}, params_{params}, impl_{std::make_unique<Impl>()} {
  params_.validate();
  if (params_.band_limit >= 0) {
    const int band = params_.band_limit == 0 ? BandLimiter::auto_band(*grid_) : params_.band_limit;
    impl_->limiter = std::make_unique<BandLimiter>(grid_, band);
  }
  impl_->degree_calibration = degree_integral(covering_map_field(grid_));
}

HomogeneousFlow::~HomogeneousFlow() = default;

int HomogeneousFlow::band() const { return impl_->limiter ? impl_->limiter->band() : -1; }

MatrixField HomogeneousFlow::framing_rhs(const MatrixField& a) const {
  MatrixField f = hf_rhs(Framing(grid_, a), params_.contraction);
  if (impl_->limiter) f = impl_->limiter->apply(f);
  return f;
}

namespace {

using Rhs = std::function<MatrixField(const MatrixField&)>;

MatrixField advance(const Rhs& rhs, const MatrixField& y, double h, Integrator integrator) {
  if (integrator == Integrator::euler) return plus(y, h, rhs(y));
  const MatrixField k1 = rhs(y);
  const MatrixField k2 = rhs(plus(y, 0.5 * h, k1));
  const MatrixField k3 = rhs(plus(y, 0.5 * h, k2));
  const MatrixField k4 = rhs(plus(y, h, k3));
  MatrixField out = y;
  axpy(out, h / 6.0, k1);
  axpy(out, h / 3.0, k2);
  axpy(out, h / 3.0, k3);
  axpy(out, h / 6.0, k4);
  return out;
}

struct Driver {
  const Grid& grid;
  GridPtr grid_ptr;
  const FlowParams& params;
  double calibration;
  Rhs rhs;
  // Maps the evolved state to (A, a).
  std::function<MatrixField(const MatrixField&)> to_framing;
  std::function<MatrixField(const MatrixField&)> to_gauge;

  // Returns the node of the first violation of the positivity floor, if any.
  std::optional<std::size_t> positivity_violation(const MatrixField& a) const {
    for (std::size_t n = 0; n < a.size(); ++n) {
      if (!(a[n].determinant() > params.det_floor)) return n;
    }
    return std::nullopt;
  }

  FlowSample diagnose(double t, double dt, const MatrixField& a_frame, const MatrixField* previous) const {
    FlowSample s;
    s.t = t;
    s.dt = dt;
    const Framing w(grid_ptr, a_frame);
    const CurvatureBundle cb = curvature_bundle(w);
    const HField h = contract(cb.curvature, params.contraction);
    const FieldNorms hn = field_norms(grid, h);
    const FieldNorms rn = field_norms(grid, cb.curvature);
    s.sup_H = hn.sup;
    s.l2_H = hn.l2;
    s.sup_R = rn.sup;
    s.l2_R = rn.l2;
    s.c_drift = structure_variation(grid, cb.structure);
    if (previous != nullptr) {
      const double base = sup_entry(*previous);
      s.a_drift = sup_difference(a_frame, *previous) / (base > 0.0 ? base : 1.0);
    }
    return s;
  }

  void record_degree(FlowSample& s, const GaugeField& a) const {
    s.deg_raw = degree_integral(polar_project(a)) / calibration;
    s.deg_a = static_cast<int>(std::lround(s.deg_raw));
  }

  FlowTrace run(const Framing& w0, MatrixField state, std::string form) const {
    FlowTrace trace(w0);
    trace.form = std::move(form);

    MatrixField a_frame = to_framing(state);
    auto record = [&](double t, double dt, const MatrixField* previous) {
      FlowSample s = diagnose(t, dt, a_frame, previous);
      const GaugeField a(grid_ptr, to_gauge(state));
      record_degree(s, a);
      const std::size_t index = trace.samples.size();
      trace.samples.push_back(s);
      if (index == 0 || (params.snapshot_stride > 0 && index % params.snapshot_stride == 0)) {
        trace.snapshots.insert_or_assign(index, a);
      }
      return s;
    };

    const auto keep_last = [&]() {
      const std::size_t last = trace.samples.size() - 1;
      if (!trace.snapshots.contains(last)) trace.snapshots.insert_or_assign(last, GaugeField(grid_ptr, to_gauge(state)));
    };

    record(0.0, 0.0, nullptr);
    MatrixField last_sampled = a_frame;

    double t = 0.0;
    double dt = params.dt;
    const double min_dt = params.dt * std::ldexp(1.0, -params.max_halvings);
    const double t_end = params.t_max;
    const double slack = 1e-12 * std::max(1.0, t_end);
    std::size_t since_sample = 0;

    while (t < t_end - slack) {
      if (trace.steps >= params.max_steps) {
        trace.outcome = FlowOutcome::step_limit;
        trace.error_time = t;
        trace.message = "step limit reached before t_max";
        break;
      }
      double h = std::min(dt, t_end - t);
      MatrixField next;
      MatrixField next_frame;
      std::optional<std::size_t> bad_node;
      bool blew_up = false;
      for (;;) {
        h = std::min(dt, t_end - t);
        bool stage_failed = false;
        try {
          next = advance(rhs, state, h, params.integrator);
        } catch (const InvalidArgument&) {
          // An intermediate stage left the positive framings.
          stage_failed = true;
        }
        if (stage_failed) {
          next = state;
          next_frame = a_frame;
          blew_up = false;
          bad_node = positivity_violation(a_frame).value_or(0);
        } else {
          next_frame = to_framing(next);
          blew_up = !all_finite(next_frame) || sup_entry(next_frame) > params.blowup_ceiling;
          bad_node = blew_up ? std::nullopt : positivity_violation(next_frame);
        }
        const bool too_big = !blew_up && sup_difference(next_frame, a_frame) > params.max_increment;
        const bool failed = blew_up || bad_node.has_value() || too_big;
        if (failed && params.step_control == StepControl::halving && dt / 2 >= min_dt) {
          dt /= 2;
          continue;
        }
        break;
      }
      if (blew_up) {
        trace.outcome = FlowOutcome::blowup;
        trace.error_time = t + h;
        trace.message = "framing exceeded the blow-up ceiling";
        break;
      }
      if (bad_node) {
        trace.outcome = FlowOutcome::positivity_lost;
        trace.error_time = t + h;
        trace.error_node = bad_node;
        trace.message = "det A fell below the positivity floor";
        break;
      }
      state = std::move(next);
      a_frame = std::move(next_frame);
      t += h;
      ++trace.steps;
      ++since_sample;
      const bool at_end = !(t < t_end - slack);
      if (since_sample >= params.sample_stride || at_end) {
        const FlowSample s = record(t, h, &last_sampled);
        last_sampled = a_frame;
        since_sample = 0;
        if (!(s.sup_H <= params.blowup_ceiling) || !(s.sup_R <= params.blowup_ceiling)) {
          trace.outcome = FlowOutcome::blowup;
          trace.error_time = t;
          trace.message = "curvature norm exceeded the blow-up ceiling";
          break;
        }
      }
    }
    keep_last();
    return trace;
  }
};

}  // namespace

MatrixField HomogeneousFlow::step(const MatrixField& a, double dt) const {
  return advance([this](const MatrixField& y) { return framing_rhs(y); }, a, dt, params_.integrator);
}

FlowTrace HomogeneousFlow::integrate(const Framing& w0) const {
  if (&w0.grid() != grid_.get()) throw InvalidArgument("framing lives on a different grid");
  const MatrixField a0 = w0.matrices();
  MatrixField a0_inv(a0.size());
  for (std::size_t n = 0; n < a0.size(); ++n) a0_inv[n] = a0[n].inverse();
  Driver d{*grid_, grid_, params_, impl_->degree_calibration,
           [this](const MatrixField& y) { return framing_rhs(y); },
           [](const MatrixField& y) { return y; },
           [a0_inv](const MatrixField& y) {
             MatrixField g(y.size());
             for (std::size_t n = 0; n < y.size(); ++n) g[n] = a0_inv[n] * y[n];
             return g;
           }};
  return d.run(w0, a0, "framing");
}

FlowTrace HomogeneousFlow::integrate_gauge(const Framing& w0) const {
  if (&w0.grid() != grid_.get()) throw InvalidArgument("framing lives on a different grid");
  const MatrixField a0 = w0.matrices();
  MatrixField a0_inv(a0.size());
  for (std::size_t n = 0; n < a0.size(); ++n) a0_inv[n] = a0[n].inverse();
  auto to_framing = [a0](const MatrixField& g) {
    MatrixField a(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) a[n] = a0[n] * g[n];
    return a;
  };
  Driver d{*grid_, grid_, params_, impl_->degree_calibration,
           [this, to_framing, a0_inv](const MatrixField& g) {
             const MatrixField f = framing_rhs(to_framing(g));
             MatrixField out(g.size());
             for (std::size_t n = 0; n < g.size(); ++n) out[n] = a0_inv[n] * f[n];
             return out;
           },
           to_framing, [](const MatrixField& g) { return g; }};
  return d.run(w0, constant_field(a0.size(), Matrix3::Identity()), "gauge");
}

FlowTrace integrate_flow(const Framing& w0, const FlowParams& params) {
  return HomogeneousFlow(w0.grid_ptr(), params).integrate(w0);
}

FlowTrace integrate_flow_gauge(const Framing& w0, const FlowParams& params) {
  return HomogeneousFlow(w0.grid_ptr(), params).integrate_gauge(w0);
}

ConvergenceReport detect_convergence(const FlowTrace& trace, const FlowParams& params) {
  ConvergenceReport report;
  if (trace.samples.empty()) throw InvalidArgument("empty flow trace");
  const auto& s = trace.samples;
  report.final_sup_H = s.back().sup_H;
  report.final_sup_R = s.back().sup_R;
  for (const auto& sample : s) {
    if (sample.deg_a != 0) report.orbit_preserved = false;
  }

  const bool reached = trace.outcome == FlowOutcome::completed &&
                       s.back().t >= params.t_max - 1e-12 * std::max(1.0, params.t_max);
  if (!reached) return report;

  // Earliest index from which H stays below tolerance and a(t) stops moving.
  std::size_t start = s.size();
  for (std::size_t i = s.size(); i-- > 0;) {
    if (!(s[i].sup_H <= params.tol_H)) break;
    if (i + 1 < s.size() && !(s[i + 1].a_drift <= params.tol_drift)) break;
    start = i;
  }
  if (start == s.size() || s.size() - start < std::min(params.window, s.size())) return report;

  report.converged = true;
  report.t_prime = s[start].t;
  const auto snap = trace.snapshots.lower_bound(start);
  const GaugeField& a = snap != trace.snapshots.end() ? snap->second : trace.final_gauge();
  report.limit = gauge_apply(trace.initial, a);
  return report;
}

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream out;
  out << "t,sup_H,l2_H,sup_R,l2_R,deg_a,c_drift\n";
  out << std::setprecision(17);
  for (const auto& s : trace.samples) {
    out << s.t << ',' << s.sup_H << ',' << s.l2_H << ',' << s.sup_R << ',' << s.l2_R << ',' << s.deg_a << ','
        << s.c_drift << '\n';
  }
  return out.str();
}

}  // namespace hf
