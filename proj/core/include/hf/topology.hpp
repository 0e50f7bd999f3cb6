#pragma once

#include <optional>
#include <string>
#include <utility>

#include "hf/framing.hpp"

namespace hf {

enum class Side { left, right };

std::string_view to_string(Side s);
Side side_from_string(std::string_view name);

/// Homotopy class of a framing, measured against the left reference framing.
struct OrbitClass {
  enum class Label { left_canonical, right_canonical, twisted, unknown };
  int degree = 0;
  Label label = Label::unknown;

  /// "left_canonical", "right_canonical", "twisted(k)" or "unknown".
  std::string describe() const;
};

struct DefectValue {
  std::optional<int> value;
};

/// Result of the degree integral. `raw` is the integral divided by the
/// calibration constant; `calibration` is the integral for the covering map.
struct DegreeResult {
  double raw = 0.0;
  int rounded = 0;
  double calibration = 0.0;
};

/// rho(q) at every node.
GaugeField covering_map_field(const GridPtr& grid);

/// rho(q^k) at every node; |k| <= 8.
GaugeField power_twist_field(const GridPtr& grid, int k);

/// Unnormalized pullback-volume integral of a rotation-valued field:
/// integral of det[m_1 m_2 m_3], m_a = axial(R^T E_a(R)).
double degree_integral(const GaugeField& r);

/// Degree in pi_3(SO(3)) normalized so that the covering map has degree +1.
/// Requires R^T R = I within 1e-8 (InvalidArgument otherwise) and throws
/// CalibrationUnstable when the raw value is more than 0.25 from an integer.
DegreeResult degree(const GaugeField& r);

/// Degree of an arbitrary positive gauge field through its polar factor.
DegreeResult gauge_degree(const GaugeField& a);

/// Pointwise product; the group law of [S^3, SO(3)] on rotation fields.
GaugeField orbit_compose(const GaugeField& a, const GaugeField& b);

/// Degree of relative_gauge(left, right), computed on the grid.
int right_orbit_degree(const GridPtr& grid);

/// Labels a degree relative to the two canonical orbits.
OrbitClass classify_orbit(int degree, int right_degree);

/// Reference framing of `side` twisted by rho(q^twist) at the source.
std::pair<Framing, OrbitClass> canonical_framing(const GridPtr& grid, Side side, int twist);

/// Sign assignment of the Hirzebruch defect on the two canonical orbits.
/// Which canonical orbit carries +2 is not determined here, so it is a
/// configuration choice.
struct DefectAssignment {
  int left = 2;
  int right = -2;
};

DefectValue defect_report(const OrbitClass& c, DefectAssignment assignment = {});

}  // namespace hf
