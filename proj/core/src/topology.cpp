#include "hf/topology.hpp"

#include <cmath>

#include "hf/errors.hpp"
#include "hf/quaternion.hpp"

namespace hf {

std::string_view to_string(Side s) { return s == Side::left ? "left" : "right"; }

Side side_from_string(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  throw InvalidArgument("unknown side '" + std::string(name) + "'");
}

std::string OrbitClass::describe() const {
  switch (label) {
    case Label::left_canonical:
      return "left_canonical";
    case Label::right_canonical:
      return "right_canonical";
    case Label::twisted:
      return "twisted(" + std::to_string(degree) + ")";
    case Label::unknown:
      break;
  }
  return "unknown";
}

GaugeField covering_map_field(const GridPtr& grid) { return power_twist_field(grid, 1); }

GaugeField power_twist_field(const GridPtr& grid, int k) {
  if (k < -8 || k > 8) throw InvalidArgument("twist must satisfy |k| <= 8");
  MatrixField out(grid->size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = rotation_matrix(pow(grid->node(n), k));
  return GaugeField(grid, std::move(out));
}

double degree_integral(const GaugeField& r) {
  const Grid& grid = r.grid();
  const std::size_t nodes = grid.size();
  // er[a] holds E_a(R) entrywise.
  std::array<MatrixField, 3> er;
  for (auto& e : er) e.assign(nodes, Matrix3::Zero());
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto d = grid.frame_derivatives(component(r.matrices(), i, j));
      for (int a = 0; a < 3; ++a)
        for (std::size_t n = 0; n < nodes; ++n) er[a][n](i, j) = d[a][n];
    }
  }
  ScalarField density(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    Matrix3 m;
    for (int a = 0; a < 3; ++a) {
      const Matrix3 s = r.at(n).transpose() * er[a][n];
      const Matrix3 skew = 0.5 * (s - s.transpose());
      m.col(a) = Eigen::Vector3d(skew(2, 1), skew(0, 2), skew(1, 0));
    }
    density[n] = m.determinant();
  }
  return grid.integrate(density);
}

DegreeResult degree(const GaugeField& r) {
  if (!(r.orthogonality_defect() <= 1e-8)) {
    throw InvalidArgument("degree needs a rotation-valued field; polar project first");
  }
  DegreeResult out;
  out.calibration = degree_integral(covering_map_field(r.grid_ptr()));
  out.raw = degree_integral(r) / out.calibration;
  out.rounded = static_cast<int>(std::lround(out.raw));
  if (!(std::abs(out.raw - out.rounded) <= 0.25)) throw CalibrationUnstable(out.raw);
  return out;
}

DegreeResult gauge_degree(const GaugeField& a) { return degree(polar_project(a)); }

GaugeField orbit_compose(const GaugeField& a, const GaugeField& b) { return compose(a, b); }

int right_orbit_degree(const GridPtr& grid) {
  return gauge_degree(relative_gauge(reference_left_framing(grid), reference_right_framing(grid))).rounded;
}

OrbitClass classify_orbit(int degree, int right_degree) {
  OrbitClass c;
  c.degree = degree;
  if (degree == 0) {
    c.label = OrbitClass::Label::left_canonical;
  } else if (degree == right_degree) {
    c.label = OrbitClass::Label::right_canonical;
  } else {
    c.label = OrbitClass::Label::twisted;
  }
  return c;
}

std::pair<Framing, OrbitClass> canonical_framing(const GridPtr& grid, Side side, int twist) {
  const Framing base = side == Side::left ? reference_left_framing(grid) : reference_right_framing(grid);
  const int right_degree = right_orbit_degree(grid);
  Framing w = twist == 0 ? base : gauge_apply(base, power_twist_field(grid, twist));
  const int deg = (side == Side::left ? 0 : right_degree) + twist;
  return {std::move(w), classify_orbit(deg, right_degree)};
}

DefectValue defect_report(const OrbitClass& c, DefectAssignment assignment) {
  switch (c.label) {
    case OrbitClass::Label::left_canonical:
      return {assignment.left};
    case OrbitClass::Label::right_canonical:
      return {assignment.right};
    default:
      return {};
  }
}

}  // namespace hf
