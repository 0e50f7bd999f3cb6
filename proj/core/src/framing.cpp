#include "hf/framing.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hf/errors.hpp"
#include "hf/quaternion.hpp"

namespace hf {

namespace {

constexpr double kMaxCondition = 1e12;

void require_positive(const MatrixField& a, const char* what) {
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (!(a[n].determinant() > 0.0)) {
      throw InvalidArgument(std::string(what) + " has non-positive determinant at node " + std::to_string(n));
    }
  }
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (&a != &b) throw InvalidArgument("fields live on different grids");
}

// Cheap screen first: |A|_F |A^-1|_F bounds the 2-norm condition number
// from above, so the SVD only runs for nodes that might fail.
void require_conditioned(const Matrix3& a, std::size_t node) {
  if (a.norm() * a.inverse().norm() <= kMaxCondition) return;
  const double cond = condition_number(a);
  if (!(cond <= kMaxCondition)) throw SingularFramingError(node, cond);
}

struct Polar {
  Matrix3 rotation;
  Matrix3 stretch;
};

Polar polar_decompose(const Matrix3& a, std::size_t node) {
  require_conditioned(a, node);
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(a.transpose() * a);
  const Eigen::Vector3d lambda = eig.eigenvalues().cwiseSqrt();
  const Matrix3& v = eig.eigenvectors();
  const Matrix3 inv_sqrt = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
  const Matrix3 sqrt = v * lambda.asDiagonal() * v.transpose();
  return {a * inv_sqrt, sqrt};
}

}  // namespace

double condition_number(const Matrix3& m) {
  const Eigen::Vector3d s = m.jacobiSvd().singularValues();
  if (s[2] == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[2];
}

Framing::Framing(GridPtr grid, MatrixField a) : grid_{std::move(grid)}, a_{std::move(a)} {
  grid_->check_shape(a_.size());
  require_positive(a_, "framing");
}

Framing Framing::transformed(const Matrix3& g) const {
  MatrixField out(a_.size());
  for (std::size_t n = 0; n < a_.size(); ++n) out[n] = g * a_[n];
  return Framing(grid_, std::move(out));
}

Framing Framing::scaled(double lambda) const {
  MatrixField out(a_.size());
  for (std::size_t n = 0; n < a_.size(); ++n) out[n] = lambda * a_[n];
  return Framing(grid_, std::move(out));
}

GaugeField::GaugeField(GridPtr grid, MatrixField a) : grid_{std::move(grid)}, a_{std::move(a)} {
  grid_->check_shape(a_.size());
  require_positive(a_, "gauge field");
}

GaugeField GaugeField::identity(GridPtr grid) {
  const std::size_t n = grid->size();
  return GaugeField(std::move(grid), constant_field(n, Matrix3::Identity()));
}

GaugeField GaugeField::inverse() const {
  MatrixField out(a_.size());
  for (std::size_t n = 0; n < a_.size(); ++n) out[n] = a_[n].inverse();
  return GaugeField(grid_, std::move(out));
}

GaugeField GaugeField::transposed() const {
  MatrixField out(a_.size());
  for (std::size_t n = 0; n < a_.size(); ++n) out[n] = a_[n].transpose();
  return GaugeField(grid_, std::move(out));
}

double GaugeField::orthogonality_defect() const {
  double worst = 0.0;
  for (const auto& m : a_) {
    worst = std::max(worst, (m.transpose() * m - Matrix3::Identity()).cwiseAbs().maxCoeff());
  }
  return worst;
}

Deformation::Deformation(GridPtr grid) : grid_{std::move(grid)} {}

void Deformation::append(double t, GaugeField a) {
  require_same_grid(*grid_, a.grid());
  if (samples_.empty()) {
    if (t != 0.0) throw InvalidArgument("deformation must start at t = 0");
    for (const auto& m : a.matrices()) {
      if ((m - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidArgument("deformation must start at the identity gauge");
      }
    }
  } else if (!(t > samples_.back().first)) {
    throw InvalidArgument("deformation times must increase");
  }
  samples_.emplace_back(t, std::move(a));
}

Framing reference_left_framing(const GridPtr& grid) {
  return Framing(grid, constant_field(grid->size(), Matrix3::Identity()));
}

Framing reference_right_framing(const GridPtr& grid) {
  MatrixField a(grid->size());
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = rotation_matrix(grid->node(n));
  return Framing(grid, std::move(a));
}

Framing gauge_apply(const Framing& w, const GaugeField& a) {
  require_same_grid(w.grid(), a.grid());
  MatrixField out(a.matrices().size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = w.at(n) * a.at(n);
  return Framing(w.grid_ptr(), std::move(out));
}

GaugeField relative_gauge(const Framing& w, const Framing& z) {
  require_same_grid(w.grid(), z.grid());
  MatrixField out(w.matrices().size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    require_conditioned(w.at(n), n);
    out[n] = w.at(n).partialPivLu().solve(z.at(n));
  }
  return GaugeField(w.grid_ptr(), std::move(out));
}

GaugeField compose(const GaugeField& a, const GaugeField& b) {
  require_same_grid(a.grid(), b.grid());
  MatrixField out(a.matrices().size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = a.at(n) * b.at(n);
  return GaugeField(a.grid_ptr(), std::move(out));
}

GaugeField polar_project(const GaugeField& a) {
  MatrixField out(a.matrices().size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = polar_decompose(a.at(n), n).rotation;
  return GaugeField(a.grid_ptr(), std::move(out));
}

GaugeField polar_homotopy(const GaugeField& a, double s) {
  MatrixField out(a.matrices().size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const Polar p = polar_decompose(a.at(n), n);
    out[n] = p.rotation * ((1.0 - s) * p.stretch + s * Matrix3::Identity());
  }
  return GaugeField(a.grid_ptr(), std::move(out));
}

}  // namespace hf
