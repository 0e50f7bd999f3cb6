#pragma once

#include <utility>
#include <vector>

#include "hf/fields.hpp"
#include "hf/grid.hpp"

namespace hf {

/// Structure object w^(i) = A^i_s E*^(s), with E* the coframe dual to the
/// left-invariant frame E_a(q) = q e_a. Only positive framings (det A > 0)
/// are modelled.
class Framing {
 public:
  /// Throws InvalidArgument on shape mismatch or a node with det A <= 0.
  Framing(GridPtr grid, MatrixField a);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const MatrixField& matrices() const { return a_; }
  const Matrix3& at(std::size_t n) const { return a_[n]; }

  /// Target action w -> g o w (constant g), which is A -> g A.
  Framing transformed(const Matrix3& g) const;
  /// lambda w.
  Framing scaled(double lambda) const;

 private:
  GridPtr grid_;
  MatrixField a_;
};

/// Gauge transformation a(x) in reference-frame components; positive.
class GaugeField {
 public:
  GaugeField(GridPtr grid, MatrixField a);

  static GaugeField identity(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const MatrixField& matrices() const { return a_; }
  const Matrix3& at(std::size_t n) const { return a_[n]; }

  /// Pointwise inverse.
  GaugeField inverse() const;
  /// Pointwise transpose (the inverse for rotation-valued fields).
  GaugeField transposed() const;

  /// Largest deviation of a^T a from the identity over nodes.
  double orthogonality_defect() const;

 private:
  GridPtr grid_;
  MatrixField a_;
};

/// Sampled path a(t) of gauge fields with a(0) = Id.
class Deformation {
 public:
  explicit Deformation(GridPtr grid);

  /// Times must increase; the first sample must sit at t = 0.
  void append(double t, GaugeField a);

  const std::vector<std::pair<double, GaugeField>>& samples() const { return samples_; }

 private:
  GridPtr grid_;
  std::vector<std::pair<double, GaugeField>> samples_;
};

Framing reference_left_framing(const GridPtr& grid);

/// A(q) = rho(q): coframe dual to the right-invariant frame e_a q.
Framing reference_right_framing(const GridPtr& grid);

/// Source action w o a: A -> A a pointwise.
Framing gauge_apply(const Framing& w, const GaugeField& a);

/// The unique a with gauge_apply(w, a) == z, i.e. A_w^{-1} A_z.
/// Throws SingularFramingError when A_w has condition number above 1e12.
GaugeField relative_gauge(const Framing& w, const Framing& z);

/// Pointwise product a b (the group law on gauge fields).
GaugeField compose(const GaugeField& a, const GaugeField& b);

/// Rotation factor a (a^T a)^{-1/2} at every node.
GaugeField polar_project(const GaugeField& a);

/// Straight-line homotopy between a and its polar factor: R ((1-s) P + s I)
/// with a = R P. Positive for every s in [0, 1].
GaugeField polar_homotopy(const GaugeField& a, double s);

/// 2-norm condition number of a 3x3 matrix.
double condition_number(const Matrix3& m);

}  // namespace hf
