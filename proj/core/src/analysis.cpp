#include "hf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "hf/errors.hpp"

namespace hf {

std::string_view to_string(LieClass c) {
  switch (c) {
    case LieClass::su2:
      return "su2";
    case LieClass::abelian:
      return "abelian";
    case LieClass::other:
      return "other";
  }
  return "?";
}

LieLimitReport llg_check(const Framing& w, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("llg_check tolerance must be positive");
  const StructureField c = structure_functions(w);
  LieLimitReport r;
  r.mean_constants = mean_structure(w.grid(), c);
  r.constancy_residual = structure_variation(w.grid(), c);
  r.passes = r.constancy_residual <= tol;
  r.globalizable = r.passes;
  return r;
}

LieAlgebraSummary lie_classify(const StructureComponents& c, double tol_k) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        if (std::abs(c[sidx(k, i, j)] + c[sidx(k, j, i)]) > 1e-12 * std::max(1.0, scale))
          throw InvalidArgument("structure constants are not antisymmetric in the lower indices");
      }

  LieAlgebraSummary out;
  // sum_l C^l_ij C^m_lk + C^l_jk C^m_li + C^l_ki C^m_lj
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < 3; ++m) {
          double s = 0.0;
          for (int l = 0; l < 3; ++l) {
            s += c[sidx(l, i, j)] * c[sidx(m, l, k)] + c[sidx(l, j, k)] * c[sidx(m, l, i)] +
                 c[sidx(l, k, i)] * c[sidx(m, l, j)];
          }
          out.jacobi_residual = std::max(out.jacobi_residual, std::abs(s));
        }

  // K_ij = C^a_ib C^b_ja
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += c[sidx(a, i, b)] * c[sidx(b, j, a)];
      out.killing_form(i, j) = s;
    }
  const Eigen::SelfAdjointEigenSolver<Matrix3> eig(out.killing_form, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 3; ++i) out.killing_eigenvalues[i] = eig.eigenvalues()[i];

  if (scale <= tol_k) {
    out.classification = LieClass::abelian;
  } else if (out.killing_eigenvalues[2] < -tol_k) {
    out.classification = LieClass::su2;
  } else {
    out.classification = LieClass::other;
  }
  return out;
}

LieLimitReport analyze_limit(const Framing& w, double tol, double tol_k) {
  LieLimitReport r = llg_check(w, tol);
  const LieAlgebraSummary s = lie_classify(r.mean_constants, tol_k);
  r.jacobi_residual = s.jacobi_residual;
  r.killing_eigenvalues = s.killing_eigenvalues;
  r.classification = s.classification;
  return r;
}

StructureComponents scaled_epsilon(double scale) {
  StructureComponents c{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[sidx(k, i, j)] = scale * levi_civita(i, j, k);
  return c;
}

StructureComponents change_basis(const StructureComponents& c, const Matrix3& g) {
  // [X'_i, X'_j] = g(p,i) g(q,j) C^r_pq X_r and X_r = sum_k ginv(k, r) X'_k.
  const Matrix3 ginv = g.inverse();
  StructureComponents out{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q)
            for (int r = 0; r < 3; ++r) s += g(p, i) * g(q, j) * c[sidx(r, p, q)] * ginv(k, r);
        out[sidx(k, i, j)] = s;
      }
  return out;
}

}  // namespace hf
