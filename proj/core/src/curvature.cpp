#include "hf/curvature.hpp"

#include <cmath>
#include <string>

#include "hf/errors.hpp"

namespace hf {

namespace {

constexpr double kMaxCondition = 1e12;

MatrixField inverse_frame(const Framing& w) {
  MatrixField b(w.matrices().size());
  for (std::size_t n = 0; n < b.size(); ++n) {
    const Matrix3& a = w.at(n);
    b[n] = a.inverse();
    // |A|_F |A^-1|_F bounds the 2-norm condition from above (within a factor
    // of 3), so only genuinely bad nodes pay for the SVD.
    if (!(a.norm() * b[n].norm() <= kMaxCondition)) {
      const double cond = condition_number(a);
      if (!(cond <= kMaxCondition)) throw SingularFramingError(n, cond);
    }
  }
  return b;
}

// X_l(f) for l = 0..2 given E_a(f): sum_a B(a, l) E_a f.
std::array<ScalarField, 3> to_moving_frame(const MatrixField& b, const std::array<ScalarField, 3>& e) {
  std::array<ScalarField, 3> out;
  for (auto& o : out) o.resize(b.size());
  for (std::size_t n = 0; n < b.size(); ++n) {
    for (int l = 0; l < 3; ++l) out[l][n] = b[n](0, l) * e[0][n] + b[n](1, l) * e[1][n] + b[n](2, l) * e[2][n];
  }
  return out;
}

StructureField structure_from_inverse(const Framing& w, const MatrixField& b) {
  const Grid& grid = w.grid();
  const std::size_t nodes = b.size();
  // dB[c][j][l] = X_l(B^c_j)
  std::array<std::array<std::array<ScalarField, 3>, 3>, 3> db;
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < 3; ++j) db[c][j] = to_moving_frame(b, grid.frame_derivatives(component(b, c, j)));
  }
  StructureField out(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    const Matrix3& a = w.at(n);
    const Matrix3& bn = b[n];
    StructureComponents& cn = out[n];
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        // Bracket in reference components: 2 eps_abc B^a_i B^b_j + X_i(B^c_j) - X_j(B^c_i)
        Eigen::Vector3d v;
        const Eigen::Vector3d bi = bn.col(i), bj = bn.col(j);
        v = 2.0 * bi.cross(bj);
        for (int c = 0; c < 3; ++c) v[c] += db[c][j][i][n] - db[c][i][j][n];
        const Eigen::Vector3d k = a * v;
        for (int kk = 0; kk < 3; ++kk) {
          cn[sidx(kk, i, j)] = k[kk];
          cn[sidx(kk, j, i)] = -k[kk];
        }
      }
      for (int kk = 0; kk < 3; ++kk) cn[sidx(kk, i, i)] = 0.0;
    }
  }
  return out;
}

CurvatureField curvature_from_structure(const Grid& grid, const MatrixField& b, const StructureField& c) {
  const std::size_t nodes = b.size();
  CurvatureField out(nodes);
  ScalarField comp(nodes);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        for (std::size_t n = 0; n < nodes; ++n) comp[n] = c[n][sidx(k, i, j)];
        const auto x = to_moving_frame(b, grid.frame_derivatives(comp));
        for (std::size_t n = 0; n < nodes; ++n) {
          for (int l = 0; l < 3; ++l) {
            out[n][ridx(k, i, j, l)] = x[l][n];
            out[n][ridx(k, j, i, l)] = -x[l][n];
          }
        }
      }
      for (std::size_t n = 0; n < nodes; ++n) {
        for (int l = 0; l < 3; ++l) out[n][ridx(k, i, i, l)] = 0.0;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Contraction c) {
  switch (c) {
    case Contraction::div_k:
      return "div_k";
    case Contraction::div_k_reversed:
      return "div_k_reversed";
    case Contraction::trace_i:
      return "trace_i";
  }
  return "?";
}

Contraction contraction_from_string(std::string_view name) {
  if (name == "div_k") return Contraction::div_k;
  if (name == "div_k_reversed") return Contraction::div_k_reversed;
  if (name == "trace_i") return Contraction::trace_i;
  throw InvalidArgument("unknown contraction '" + std::string(name) + "'");
}

StructureField structure_functions(const Framing& w) { return structure_from_inverse(w, inverse_frame(w)); }

CurvatureBundle curvature_bundle(const Framing& w) {
  const MatrixField b = inverse_frame(w);
  CurvatureBundle out;
  out.structure = structure_from_inverse(w, b);
  out.curvature = curvature_from_structure(w.grid(), b, out.structure);
  return out;
}

CurvatureField linear_curvature(const Framing& w) { return curvature_bundle(w).curvature; }

HField contract(const CurvatureField& r, Contraction contraction) {
  HField h(r.size(), Matrix3::Zero());
  for (std::size_t n = 0; n < r.size(); ++n) {
    const CurvatureComponents& rn = r[n];
    Matrix3& hn = h[n];
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        switch (contraction) {
          case Contraction::div_k:
            for (int i = 0; i < 3; ++i) s += rn[ridx(k, j, i, i)];
            break;
          case Contraction::div_k_reversed:
            for (int i = 0; i < 3; ++i) s += rn[ridx(k, i, j, i)];
            break;
          case Contraction::trace_i:
            for (int l = 0; l < 3; ++l) s += rn[ridx(l, l, j, k)];
            break;
        }
        hn(k, j) = s;
      }
    }
  }
  return h;
}

HField h_tensor(const Framing& w, Contraction contraction) { return contract(linear_curvature(w), contraction); }

FieldNorms field_norms(const Grid& grid, std::span<const double> flat, std::size_t components) {
  if (components == 0 || flat.size() != components * grid.size()) {
    throw InvalidArgument("tensor field does not match grid");
  }
  FieldNorms out;
  double integral = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    double sq = 0.0;
    for (std::size_t c = 0; c < components; ++c) sq += flat[n * components + c] * flat[n * components + c];
    out.sup = std::max(out.sup, std::sqrt(sq));
    integral += grid.weights()[n] * sq;
  }
  out.l2 = std::sqrt(integral);
  return out;
}

FieldNorms field_norms(const Grid& grid, const MatrixField& f) {
  std::vector<double> flat(f.size() * 9);
  for (std::size_t n = 0; n < f.size(); ++n) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) flat[n * 9 + r * 3 + c] = f[n](r, c);
  }
  return field_norms(grid, flat, 9);
}

FieldNorms field_norms(const Grid& grid, const StructureField& f) {
  return field_norms(grid, std::span<const double>(f.empty() ? nullptr : f.front().data(), f.size() * 27), 27);
}

FieldNorms field_norms(const Grid& grid, const CurvatureField& f) {
  return field_norms(grid, std::span<const double>(f.empty() ? nullptr : f.front().data(), f.size() * 81), 81);
}

StructureComponents mean_structure(const Grid& grid, const StructureField& c) {
  grid.check_shape(c.size());
  StructureComponents mean{};
  double total = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double w = grid.weights()[n];
    total += w;
    for (std::size_t k = 0; k < 27; ++k) mean[k] += w * c[n][k];
  }
  for (double& m : mean) m /= total;
  return mean;
}

double structure_variation(const Grid& grid, const StructureField& c) {
  const StructureComponents mean = mean_structure(grid, c);
  double worst = 0.0;
  for (const auto& cn : c) {
    double sq = 0.0;
    for (std::size_t k = 0; k < 27; ++k) sq += (cn[k] - mean[k]) * (cn[k] - mean[k]);
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

}  // namespace hf
