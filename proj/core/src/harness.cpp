#include "hf/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>
#include <json.hpp>

#include "hf/errors.hpp"
#include "hf/io.hpp"

namespace hf {

using nlohmann::json;

std::string_view to_string(FlowForms f) {
  switch (f) {
    case FlowForms::framing:
      return "framing";
    case FlowForms::gauge:
      return "gauge";
    case FlowForms::both:
      return "both";
  }
  return "?";
}

FlowForms flow_forms_from_string(std::string_view name) {
  if (name == "framing") return FlowForms::framing;
  if (name == "gauge") return FlowForms::gauge;
  if (name == "both") return FlowForms::both;
  throw InvalidArgument("unknown flow forms '" + std::string(name) + "'");
}

std::string_view to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::converged:
      return "converged";
    case RunOutcome::not_converged:
      return "not_converged";
    case RunOutcome::error:
      return "error";
  }
  return "?";
}

// ---------------------------------------------------------------- config

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidArgument("bad value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::array<int, 3> parse_grid(std::string_view value) {
  std::array<int, 3> out{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = value.find(',', start);
    const bool last = i == 2;
    if (last != (comma == std::string_view::npos)) throw InvalidArgument("grid must be three comma-separated counts");
    out[i] = parse_number<int>("grid", trim(value.substr(start, last ? std::string_view::npos : comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::map<std::string, std::string, std::less<>> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view v = trim(line.substr(eq + 1));
    if (!seen.emplace(key, std::string(v)).second) throw InvalidArgument("duplicate key '" + key + "'");

    FlowParams& f = c.flow;
    if (key == "grid") c.grid = parse_grid(v);
    else if (key == "side") c.side = side_from_string(v);
    else if (key == "twist") c.twist = parse_number<int>(key, v);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "eps") c.eps = parse_number<double>(key, v);
    else if (key == "cutoff") c.cutoff = parse_number<int>(key, v);
    else if (key == "forms") c.forms = flow_forms_from_string(v);
    else if (key == "output_dir") c.output_dir = std::string(v);
    else if (key == "llg_tol") c.llg_tol = parse_number<double>(key, v);
    else if (key == "tol_k") c.tol_k = parse_number<double>(key, v);
    else if (key == "defect_left") c.defect_left = parse_number<int>(key, v);
    else if (key == "dt") f.dt = parse_number<double>(key, v);
    else if (key == "t_max") f.t_max = parse_number<double>(key, v);
    else if (key == "max_steps") f.max_steps = parse_number<std::size_t>(key, v);
    else if (key == "tol_H") f.tol_H = parse_number<double>(key, v);
    else if (key == "tol_drift") f.tol_drift = parse_number<double>(key, v);
    else if (key == "window") f.window = parse_number<std::size_t>(key, v);
    else if (key == "contraction") f.contraction = contraction_from_string(v);
    else if (key == "integrator") f.integrator = integrator_from_string(v);
    else if (key == "step_control") f.step_control = step_control_from_string(v);
    else if (key == "sample_stride") f.sample_stride = parse_number<std::size_t>(key, v);
    else if (key == "snapshot_stride") f.snapshot_stride = parse_number<std::size_t>(key, v);
    else if (key == "band_limit") f.band_limit = parse_number<int>(key, v);
    else if (key == "det_floor") f.det_floor = parse_number<double>(key, v);
    else if (key == "blowup_ceiling") f.blowup_ceiling = parse_number<double>(key, v);
    else if (key == "max_halvings") f.max_halvings = parse_number<int>(key, v);
    else if (key == "max_increment") f.max_increment = parse_number<double>(key, v);
    else throw InvalidArgument("unknown key '" + key + "'");
  }
  c.source = text;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  const FlowParams& f = flow;
  out << "grid = " << grid[0] << ',' << grid[1] << ',' << grid[2] << '\n'
      << "side = " << to_string(side) << '\n'
      << "twist = " << twist << '\n'
      << "seed = " << seed << '\n'
      << "eps = " << format_double(eps) << '\n'
      << "cutoff = " << cutoff << '\n'
      << "forms = " << to_string(forms) << '\n'
      << "output_dir = " << output_dir.string() << '\n'
      << "llg_tol = " << format_double(llg_tol) << '\n'
      << "tol_k = " << format_double(tol_k) << '\n'
      << "defect_left = " << defect_left << '\n'
      << "dt = " << format_double(f.dt) << '\n'
      << "t_max = " << format_double(f.t_max) << '\n'
      << "max_steps = " << f.max_steps << '\n'
      << "tol_H = " << format_double(f.tol_H) << '\n'
      << "tol_drift = " << format_double(f.tol_drift) << '\n'
      << "window = " << f.window << '\n'
      << "contraction = " << to_string(f.contraction) << '\n'
      << "integrator = " << to_string(f.integrator) << '\n'
      << "step_control = " << to_string(f.step_control) << '\n'
      << "sample_stride = " << f.sample_stride << '\n'
      << "snapshot_stride = " << f.snapshot_stride << '\n'
      << "band_limit = " << f.band_limit << '\n'
      << "det_floor = " << format_double(f.det_floor) << '\n'
      << "blowup_ceiling = " << format_double(f.blowup_ceiling) << '\n'
      << "max_halvings = " << f.max_halvings << '\n'
      << "max_increment = " << format_double(f.max_increment) << '\n';
  return out.str();
}

void ExperimentConfig::validate() const {
  for (int n : grid) {
    if (n < Grid::kMinCount) throw InvalidArgument("grid counts must be at least 4");
  }
  if (grid[0] % 2 != 0 || grid[2] % 2 != 0) throw InvalidArgument("alpha and gamma counts must be even");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be a finite non-negative number");
  if (cutoff < 0 || cutoff > 8) throw InvalidArgument("cutoff must lie in [0, 8]");
  if (std::abs(twist) > 8) throw InvalidArgument("|twist| must be at most 8");
  if (!(llg_tol > 0.0) || !(tol_k > 0.0)) throw InvalidArgument("llg_tol and tol_k must be positive");
  if (defect_left != 2 && defect_left != -2) throw InvalidArgument("defect_left must be 2 or -2");
  if (output_dir.empty()) throw InvalidArgument("output_dir must not be empty");
  flow.validate();
}

// ---------------------------------------------------------------- deformation

GaugeField random_deformation(const GridPtr& grid, std::uint64_t seed, double eps, int cutoff) {
  if (!(eps >= 0.0)) throw InvalidArgument("deformation amplitude must be non-negative");
  if (cutoff < 0) throw InvalidArgument("cutoff must be non-negative");
  if (eps == 0.0) return GaugeField::identity(grid);

  std::vector<std::array<int, 4>> powers;
  for (int a = 0; a <= cutoff; ++a)
    for (int b = 0; a + b <= cutoff; ++b)
      for (int c = 0; a + b + c <= cutoff; ++c)
        for (int d = 0; a + b + c + d <= cutoff; ++d) powers.push_back({a, b, c, d});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 9>> coeffs(powers.size());
  for (int e = 0; e < 9; ++e)
    for (auto& c : coeffs) c[e] = u(rng);

  MatrixField s(grid->size(), Matrix3::Zero());
  double sup = 0.0;
  for (std::size_t n = 0; n < grid->size(); ++n) {
    const Eigen::Vector4d q = grid->node(n).vec();
    for (std::size_t m = 0; m < powers.size(); ++m) {
      double mono = 1.0;
      for (int v = 0; v < 4; ++v)
        for (int p = 0; p < powers[m][v]; ++p) mono *= q[v];
      for (int e = 0; e < 9; ++e) s[n](e / 3, e % 3) += coeffs[m][e] * mono;
    }
    sup = std::max(sup, s[n].norm());
  }
  if (sup == 0.0) return GaugeField::identity(grid);
  MatrixField out(grid->size());
  for (std::size_t n = 0; n < grid->size(); ++n) out[n] = Matrix3((eps / sup * s[n]).exp());
  return GaugeField(grid, std::move(out));
}

// ---------------------------------------------------------------- runs

namespace {

double sup_gap(const Framing& w0, const GaugeField& a, const GaugeField& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < w0.matrices().size(); ++n) m = std::max(m, (w0.at(n) * (a.at(n) - b.at(n))).norm());
  return m;
}

}  // namespace

RunArtifact run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunArtifact art(config);
  try {
    const GridPtr grid = build_grid(config.grid[0], config.grid[1], config.grid[2]);
    auto [canonical, orbit] = canonical_framing(grid, config.side, config.twist);
    art.orbit = orbit;
    art.defect = defect_report(orbit, DefectAssignment{config.defect_left, -config.defect_left});
    const Framing w0 = gauge_apply(canonical, random_deformation(grid, config.seed, config.eps, config.cutoff));

    const HomogeneousFlow flow(grid, config.flow);
    art.band = flow.band();
    if (config.forms != FlowForms::gauge) art.trace = flow.integrate(w0);
    if (config.forms != FlowForms::framing) art.gauge_trace = flow.integrate_gauge(w0);

    if (art.trace && art.gauge_trace) {
      double gap = 0.0;
      for (const auto& [index, a] : art.gauge_trace->snapshots) {
        const auto other = art.trace->snapshots.find(index);
        if (other != art.trace->snapshots.end()) gap = std::max(gap, sup_gap(w0, a, other->second));
      }
      art.form_gap = gap;
    }

    const FlowTrace& primary = art.trace ? *art.trace : *art.gauge_trace;
    art.convergence = detect_convergence(primary, config.flow);
    if (art.convergence->converged) {
      art.lie = analyze_limit(*art.convergence->limit, config.llg_tol, config.tol_k);
      art.outcome = RunOutcome::converged;
    } else {
      art.outcome = primary.outcome == FlowOutcome::completed ? RunOutcome::not_converged : RunOutcome::error;
    }
    art.message = primary.message;
    if (art.gauge_trace && art.trace && art.gauge_trace->outcome != art.trace->outcome)
      art.message += (art.message.empty() ? "" : "; ") + std::string("gauge form ended ") +
                     std::string(to_string(art.gauge_trace->outcome));
  } catch (const std::exception& e) {
    art.outcome = RunOutcome::error;
    art.message = e.what();
  }
  art.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return art;
}

// ---------------------------------------------------------------- reports

namespace {

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json params_json(const ExperimentConfig& c) {
  const FlowParams& f = c.flow;
  return {{"grid", c.grid},
          {"side", to_string(c.side)},
          {"twist", c.twist},
          {"seed", c.seed},
          {"eps", c.eps},
          {"cutoff", c.cutoff},
          {"forms", to_string(c.forms)},
          {"llg_tol", c.llg_tol},
          {"tol_k", c.tol_k},
          {"defect_left", c.defect_left},
          {"dt", f.dt},
          {"t_max", f.t_max},
          {"max_steps", f.max_steps},
          {"tol_H", f.tol_H},
          {"tol_drift", f.tol_drift},
          {"window", f.window},
          {"contraction", to_string(f.contraction)},
          {"integrator", to_string(f.integrator)},
          {"step_control", to_string(f.step_control)},
          {"sample_stride", f.sample_stride},
          {"snapshot_stride", f.snapshot_stride},
          {"band_limit", f.band_limit},
          {"det_floor", f.det_floor},
          {"blowup_ceiling", f.blowup_ceiling},
          {"max_halvings", f.max_halvings},
          {"max_increment", f.max_increment}};
}

json trace_json(const FlowTrace& t) {
  json j{{"form", t.form},
         {"outcome", to_string(t.outcome)},
         {"steps", t.steps},
         {"samples", t.samples.size()},
         {"t_final", t.samples.empty() ? 0.0 : t.samples.back().t},
         {"message", t.message}};
  if (t.outcome != FlowOutcome::completed) {
    j["error_time"] = t.error_time;
    j["error_node"] = t.error_node ? json(*t.error_node) : json(nullptr);
  }
  double lo = 0.0, hi = 0.0;
  for (const auto& s : t.samples) {
    lo = std::min(lo, s.deg_raw);
    hi = std::max(hi, s.deg_raw);
  }
  j["deg_raw_range"] = {lo, hi};
  return j;
}

json lie_json(const LieLimitReport& r) {
  return {{"constancy_residual", r.constancy_residual},
          {"passes", r.passes},
          {"globalizable", r.globalizable},
          {"jacobi_residual", r.jacobi_residual},
          {"killing_eigenvalues", r.killing_eigenvalues},
          {"classification", to_string(r.classification)},
          {"mean_constants", r.mean_constants},
          {"mean_constants_order", "k,i,j"}};
}

json report(const RunArtifact& a) {
  json j{{"outcome", to_string(a.outcome)},
         {"message", a.message},
         {"orbit",
          {{"degree", a.orbit.degree}, {"label", a.orbit.describe()}}},
         {"defect", a.defect.value ? json(*a.defect.value) : json(nullptr)},
         {"band", a.band}};
  if (a.convergence) {
    const auto& c = *a.convergence;
    j["convergence"] = {{"converged", c.converged},
                        {"t_prime", nullable(c.t_prime)},
                        {"final_sup_H", c.final_sup_H},
                        {"final_sup_R", c.final_sup_R},
                        {"orbit_preserved", c.orbit_preserved}};
  } else {
    j["convergence"] = nullptr;
  }
  if (a.trace) j["framing_flow"] = trace_json(*a.trace);
  if (a.gauge_trace) j["gauge_flow"] = trace_json(*a.gauge_trace);
  j["form_gap"] = nullable(a.form_gap);
  j["lie"] = a.lie ? lie_json(*a.lie) : json(nullptr);
  return j;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

}  // namespace

std::string report_json(const RunArtifact& a) { return report(a).dump(2) + "\n"; }

std::string lie_report_json(const LieLimitReport& r) { return lie_json(r).dump(2) + "\n"; }

void write_artifact(const RunArtifact& a) {
  const auto& dir = a.config.output_dir;
  ensure_directory(dir);
  write_text_file(dir / "config.txt", a.config.source.empty() ? a.config.serialize() : a.config.source);

  json meta{{"params", params_json(a.config)},
            {"outcome", to_string(a.outcome)},
            {"message", a.message},
            {"band", a.band},
            {"field_format", "HFFIELD1"}};
  if (a.trace) meta["framing_flow"] = trace_json(*a.trace);
  if (a.gauge_trace) meta["gauge_flow"] = trace_json(*a.gauge_trace);
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");

  if (a.trace) write_text_file(dir / "trace.csv", trace_csv(*a.trace));
  if (a.gauge_trace) write_text_file(dir / (a.trace ? "trace_gauge.csv" : "trace.csv"), trace_csv(*a.gauge_trace));
  write_text_file(dir / "report.json", report_json(a));
  write_text_file(dir / "metrics.json", json{{"wall_seconds", a.wall_seconds}}.dump(2) + "\n");

  const FlowTrace* primary = a.trace ? &*a.trace : (a.gauge_trace ? &*a.gauge_trace : nullptr);
  if (primary != nullptr) {
    const Framing final = primary->final_framing();
    write_field(dir / "final.bin", pack(final.grid(), final.matrices()));
  }
  if (a.convergence && a.convergence->limit) {
    const Framing& limit = *a.convergence->limit;
    write_field(dir / "limit.bin", pack(limit.grid(), limit.matrices()));
  }
}

RunArtifact run_and_persist(const ExperimentConfig& config) {
  RunArtifact a = run_experiment(config);
  write_artifact(a);
  return a;
}

// ---------------------------------------------------------------- sweeps

SweepRow summarize(const RunArtifact& a) {
  SweepRow r;
  r.side = a.config.side;
  r.twist = a.config.twist;
  r.eps = a.config.eps;
  r.seed = a.config.seed;
  r.outcome = a.outcome;
  if (a.convergence) {
    r.t_prime = a.convergence->t_prime;
    r.sup_R_final = a.convergence->final_sup_R;
  }
  if (a.lie) r.lie_class = a.lie->classification;
  return r;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "side,twist,eps,seed,outcome,t_prime,sup_R_final,class\n";
  for (const auto& r : rows) {
    out << to_string(r.side) << ',' << r.twist << ',' << format_double(r.eps) << ',' << r.seed << ','
        << to_string(r.outcome) << ',' << (r.t_prime ? format_double(*r.t_prime) : "") << ','
        << (r.sup_R_final ? format_double(*r.sup_R_final) : "") << ','
        << (r.lie_class ? std::string(to_string(*r.lie_class)) : "none") << '\n';
  }
  return out.str();
}

std::vector<RunArtifact> sweep(const std::vector<ExperimentConfig>& configs, unsigned jobs) {
  if (configs.empty()) throw InvalidArgument("sweep needs at least one configuration");
  std::vector<std::optional<RunArtifact>> slots(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        slots[i] = run_and_persist(configs[i]);
      } catch (const std::exception& e) {
        RunArtifact failed(configs[i]);
        failed.message = e.what();
        slots[i] = std::move(failed);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunArtifact> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------- calibration

CalibrationReport calibrate(const std::array<int, 3>& counts) {
  const GridPtr grid = build_grid(counts[0], counts[1], counts[2]);
  CalibrationReport r;
  r.grid = counts;
  r.volume = grid->integrate(ScalarField(grid->size(), 1.0));
  const double exact = 2.0 * M_PI * M_PI;
  r.volume_error = std::abs(r.volume - exact) / exact;

  auto bracket_error = [&](const Framing& w, double scale) {
    const StructureComponents target = scaled_epsilon(scale);
    double worst = 0.0;
    for (const auto& c : structure_functions(w))
      for (std::size_t k = 0; k < 27; ++k) worst = std::max(worst, std::abs(c[k] - target[k]));
    return worst;
  };
  r.left_bracket_error = bracket_error(reference_left_framing(grid), 2.0);
  r.right_bracket_error = bracket_error(reference_right_framing(grid), -2.0);

  r.covering_map = degree(covering_map_field(grid));
  r.degree_calibration = r.covering_map.calibration;
  r.twists = {degree(power_twist_field(grid, -1)), degree(power_twist_field(grid, 2))};
  r.right_orbit_degree = right_orbit_degree(grid);
  r.band = BandLimiter::auto_band(*grid);
  return r;
}

std::string calibration_json(const CalibrationReport& r) {
  auto deg = [](const DegreeResult& d) { return json{{"raw", d.raw}, {"rounded", d.rounded}}; };
  const json j{{"grid", r.grid},
               {"quadrature", {{"volume", r.volume}, {"exact", 2.0 * M_PI * M_PI}, {"relative_error", r.volume_error}}},
               {"brackets", {{"left_sup_error", r.left_bracket_error}, {"right_sup_error", r.right_bracket_error}}},
               {"degree",
                {{"calibration", r.degree_calibration},
                 {"covering_map", deg(r.covering_map)},
                 {"power_-1", deg(r.twists[0])},
                 {"power_2", deg(r.twists[1])},
                 {"left_right_relative", r.right_orbit_degree}}},
               {"auto_band", r.band}};
  return j.dump(2) + "\n";
}

}  // namespace hf
