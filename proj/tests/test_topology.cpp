#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hf/errors.hpp"
#include "hf/topology.hpp"
#include "test_support.hpp"

namespace hf {
namespace {

using testing_support::SmoothGauge;

// Orthogonal null-homotopic wobble: exp of a small smooth skew field.
GaugeField small_rotation_field(const GridPtr& g, unsigned seed, double eps) {
  std::mt19937_64 rng(seed);
  std::array<testing_support::QuaternionFunction, 3> f;
  for (auto& p : f) p = testing_support::random_polynomial(rng, 2);
  MatrixField out(g->size());
  for (std::size_t n = 0; n < g->size(); ++n) {
    const Quaternion q = g->node(n);
    Matrix3 s;
    s << 0, -f[2](q), f[1](q), f[2](q), 0, -f[0](q), -f[1](q), f[0](q), 0;
    out[n] = (eps * s).exp();
  }
  return GaugeField(g, out);
}

class TopologyTest : public ::testing::Test {
 protected:
  GridPtr coarse = build_grid(8, 8, 16);
  GridPtr fine = build_grid(16, 16, 32);
};

TEST_F(TopologyTest, CoveringMapExamples) {
  EXPECT_LT((rotation_matrix(Quaternion::identity()) - Matrix3::Identity()).norm(), 1e-15);
  const double h = std::numbers::pi / 8.0;  // q = exp(pi/4 e3) as a half angle
  const Quaternion q(std::cos(h), 0.0, 0.0, std::sin(h));
  Matrix3 quarter;
  quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Quaternion r(std::cos(std::numbers::pi / 4), 0, 0, std::sin(std::numbers::pi / 4));
  EXPECT_LT((rotation_matrix(r) - quarter).norm(), 1e-15);
  EXPECT_LT((rotation_matrix(q) * rotation_matrix(q) - quarter).norm(), 1e-15);
  const Quaternion p = Quaternion(0.1, 0.7, -0.3, 0.2).normalized();
  EXPECT_LT((rotation_matrix(p) - rotation_matrix(p * -1.0)).norm(), 1e-15);
}

TEST_F(TopologyTest, BaseDegrees) {
  for (const GridPtr& g : {coarse, fine}) {
    EXPECT_EQ(degree(GaugeField::identity(g)).rounded, 0);
    EXPECT_NEAR(degree(GaugeField::identity(g)).raw, 0.0, 1e-12);
    EXPECT_EQ(degree(covering_map_field(g)).rounded, 1);
  }
}

TEST_F(TopologyTest, CalibrationStableUnderRefinement) {
  // Self-calibration makes deg(rho) = 1 by construction on each grid, so the
  // quantity that could drift is the calibration constant itself.
  const double c_coarse = degree(covering_map_field(coarse)).calibration;
  const double c_fine = degree(covering_map_field(fine)).calibration;
  EXPECT_LT(std::abs(c_coarse / c_fine - 1.0), 0.02);
  // Raw degree of the covering map on one grid with the other's calibration.
  EXPECT_LT(std::abs(degree_integral(covering_map_field(fine)) / c_coarse - 1.0), 0.02);
}

TEST_F(TopologyTest, PowerTwists) {
  for (const GridPtr& g : {coarse, fine}) {
    for (int k : {-1, 2}) EXPECT_EQ(degree(power_twist_field(g, k)).rounded, k) << k;
  }
  EXPECT_EQ(degree(power_twist_field(fine, 3)).rounded, 3);
  EXPECT_EQ(degree(power_twist_field(fine, 0)).rounded, 0);
  EXPECT_THROW(power_twist_field(fine, 9), InvalidArgument);
}

TEST_F(TopologyTest, AdditivityOnRandomPairs) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(-2, 3);
  for (int s = 0; s < 5; ++s) {
    const int j = pick(rng), k = pick(rng);
    const auto a = power_twist_field(fine, j);
    // Conjugate the second factor by a constant rotation so the pair is not
    // just q^(j+k).
    const Matrix3 c = rotation_matrix(Quaternion(0.3, 0.4, -0.5, 0.6).normalized());
    const GaugeField twist = power_twist_field(fine, k);
    MatrixField bm(fine->size());
    for (std::size_t n = 0; n < fine->size(); ++n) bm[n] = c * twist.at(n) * c.transpose();
    const GaugeField b(fine, bm);
    EXPECT_EQ(degree(orbit_compose(a, b)).rounded, j + k) << j << "+" << k;
  }
}

TEST_F(TopologyTest, TransposeNegatesDegree) {
  for (int k : {1, 2, -1}) EXPECT_EQ(degree(power_twist_field(fine, k).transposed()).rounded, -k);
}

TEST_F(TopologyTest, RejectsNonOrthogonalInput) {
  MatrixField m(coarse->size(), Matrix3::Identity());
  m[0](0, 0) = 1.1;
  EXPECT_THROW(degree(GaugeField(coarse, m)), InvalidArgument);
  EXPECT_EQ(gauge_degree(GaugeField(coarse, m)).rounded, 0);
}

TEST_F(TopologyTest, HomotopyInvariance) {
  const GaugeField rho = covering_map_field(fine);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const double eps = 0.01 * (seed + 1);  // up to 0.2
    const GaugeField wobble = small_rotation_field(fine, 100 + seed, eps);
    EXPECT_EQ(degree(orbit_compose(rho, wobble)).rounded, 1);
    EXPECT_EQ(degree(wobble).rounded, 0);
  }
  // General (non-orthogonal) exponential perturbations through the polar factor.
  for (unsigned seed = 0; seed < 3; ++seed)
    EXPECT_EQ(gauge_degree(compose(rho, GaugeField(fine, SmoothGauge(seed, 0.2).sample(fine->nodes())))).rounded, 1);
}

TEST_F(TopologyTest, LeftRightSeparation) {
  EXPECT_EQ(std::abs(right_orbit_degree(fine)), 1);
  EXPECT_EQ(std::abs(right_orbit_degree(coarse)), 1);
}

TEST_F(TopologyTest, CanonicalFramings) {
  const int dr = right_orbit_degree(fine);
  const auto [l0, cl] = canonical_framing(fine, Side::left, 0);
  EXPECT_EQ(cl.degree, 0);
  EXPECT_EQ(cl.label, OrbitClass::Label::left_canonical);
  const auto [r0, cr] = canonical_framing(fine, Side::right, 0);
  EXPECT_EQ(cr.degree, dr);
  EXPECT_EQ(cr.label, OrbitClass::Label::right_canonical);
  const auto [l2, ct] = canonical_framing(fine, Side::left, 2);
  EXPECT_EQ(ct.degree, 2);
  EXPECT_EQ(ct.describe(), "twisted(2)");
  // The recorded class agrees with a measurement of the framing itself.
  EXPECT_EQ(gauge_degree(relative_gauge(l0, l2)).rounded, 2);
  EXPECT_EQ(gauge_degree(relative_gauge(l0, r0)).rounded, dr);
}

TEST_F(TopologyTest, DefectReport) {
  const OrbitClass left{0, OrbitClass::Label::left_canonical};
  const OrbitClass right{1, OrbitClass::Label::right_canonical};
  const int hl = *defect_report(left).value, hr = *defect_report(right).value;
  EXPECT_EQ(std::min(hl, hr), -2);
  EXPECT_EQ(std::max(hl, hr), 2);
  const DefectAssignment swapped{-2, 2};
  EXPECT_EQ(*defect_report(left, swapped).value, -2);
  EXPECT_FALSE(defect_report({3, OrbitClass::Label::twisted}).value);
  EXPECT_FALSE(defect_report({}).value);
}

TEST_F(TopologyTest, SideNames) {
  EXPECT_EQ(side_from_string("right"), Side::right);
  EXPECT_EQ(to_string(Side::left), "left");
  EXPECT_THROW(side_from_string("up"), InvalidArgument);
}

}  // namespace
}  // namespace hf
