#pragma once

#include <array>
#include <string_view>

#include "hf/curvature.hpp"

namespace hf {

enum class LieClass { su2, abelian, other };
std::string_view to_string(LieClass c);

struct LieLimitReport {
  /// sup over nodes of |C - mean C|_F.
  double constancy_residual = 0.0;
  StructureComponents mean_constants{};
  bool passes = false;
  /// Set whenever constancy passes: S^3 is compact and simply connected.
  bool globalizable = false;

  // Filled by lie_classify / analyze_limit.
  double jacobi_residual = 0.0;
  std::array<double, 3> killing_eigenvalues{};
  LieClass classification = LieClass::other;
};

struct LieAlgebraSummary {
  double jacobi_residual = 0.0;
  /// Ascending.
  std::array<double, 3> killing_eigenvalues{};
  Matrix3 killing_form = Matrix3::Zero();
  LieClass classification = LieClass::other;
};

/// Constancy of the structure functions: the discrete local-Lie-group test.
LieLimitReport llg_check(const Framing& w, double tol);

/// Jacobi identity residual, Killing form and class of constant C.
/// Throws InvalidArgument when C is not antisymmetric in its lower indices.
LieAlgebraSummary lie_classify(const StructureComponents& c, double tol_k = 1e-8);

/// llg_check followed by lie_classify of the mean constants.
LieLimitReport analyze_limit(const Framing& w, double tol, double tol_k = 1e-8);

/// C with C^k_ij = scale * eps_ijk.
StructureComponents scaled_epsilon(double scale);

/// Constants of the basis change X'_i = sum_j g(j, i) X_j.
StructureComponents change_basis(const StructureComponents& c, const Matrix3& g);

}  // namespace hf
