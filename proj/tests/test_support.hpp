#pragma once

// Test-only helpers: random smooth test functions and finite-difference
// oracles that evaluate off-grid with exact quaternion arithmetic.

#include <array>
#include <functional>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "hf/fields.hpp"
#include "hf/quaternion.hpp"

namespace hf::testing_support {

using QuaternionFunction = std::function<double(const Quaternion&)>;

/// Random polynomial in (w, x, y, z) with all monomials of total degree <= degree.
inline QuaternionFunction random_polynomial(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<int, 4>> powers;
  std::vector<double> coeffs;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b)
      for (int c = 0; a + b + c <= degree; ++c)
        for (int d = 0; a + b + c + d <= degree; ++d) {
          powers.push_back({a, b, c, d});
          coeffs.push_back(u(rng));
        }
  return [powers, coeffs](const Quaternion& q) {
    double s = 0.0;
    for (std::size_t m = 0; m < powers.size(); ++m) {
      double t = coeffs[m];
      for (int e = 0; e < powers[m][0]; ++e) t *= q.w;
      for (int e = 0; e < powers[m][1]; ++e) t *= q.x;
      for (int e = 0; e < powers[m][2]; ++e) t *= q.y;
      for (int e = 0; e < powers[m][3]; ++e) t *= q.z;
      s += t;
    }
    return s;
  };
}

/// d/dt f(q exp(t e_a)) at t = 0 by a central difference along the flow line.
template <typename F>
double flow_line_derivative(F&& f, const Quaternion& q, int a, double h) {
  return (f(q * exp_unit(a, h)) - f(q * exp_unit(a, -h))) / (2.0 * h);
}

/// Brackets of a frame given as vector fields in left-invariant components.
/// frame(q) returns columns X_i = sum_a F(a, i) E_a. The bracket is computed
/// by finite differences of the coordinate functions q -> q_mu, so it is
/// independent of the spectral machinery:
///   [X_i, X_j](q_mu) = X_i(X_j q_mu) - X_j(X_i q_mu).
/// Returns C^k_ij with [X_i, X_j] = C^k_ij X_k.
inline StructureComponents bracket_oracle(const std::function<Matrix3(const Quaternion&)>& frame,
                                          const Quaternion& q, double h) {
  // X_i applied to a function g at p: sum_a F(a,i)(p) E_a g(p).
  auto apply = [&](int i, const std::function<double(const Quaternion&)>& g, const Quaternion& p) {
    const Matrix3 fp = frame(p);
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += fp(a, i) * flow_line_derivative(g, p, a + 1, h);
    return s;
  };
  // Left-invariant components of a tangent vector v at q: v = q * (0, c).
  auto components = [&](const Eigen::Vector4d& v) {
    const Quaternion t = q.conj() * Quaternion::from_vec(v);
    return Eigen::Vector3d(t.x, t.y, t.z);
  };
  StructureComponents c{};
  const Matrix3 fq = frame(q);
  const Matrix3 inv = fq.inverse();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector4d v;
      for (int mu = 0; mu < 4; ++mu) {
        auto coord = [mu](const Quaternion& p) { return p.vec()[mu]; };
        auto xj = [&, j](const Quaternion& p) { return apply(j, coord, p); };
        auto xi = [&, i](const Quaternion& p) { return apply(i, coord, p); };
        v[mu] = apply(i, xj, q) - apply(j, xi, q);
      }
      const Eigen::Vector3d ref = components(v);
      const Eigen::Vector3d in_frame = inv * ref;
      for (int k = 0; k < 3; ++k) c[sidx(k, i, j)] = in_frame[k];
    }
  }
  return c;
}


/// Smooth matrix-valued test function exp(amplitude * S(q)) with S built
/// from random quadratic polynomials; positive for every amplitude.
class SmoothGauge {
 public:
  SmoothGauge(unsigned seed, double amplitude) : amplitude_{amplitude} {
    std::mt19937_64 rng(seed);
    for (auto& p : entries_) p = random_polynomial(rng, 2);
  }
  Matrix3 operator()(const Quaternion& q) const {
    Matrix3 s;
    for (int k = 0; k < 9; ++k) s(k / 3, k % 3) = entries_[k](q);
    return Matrix3((amplitude_ * s).exp());
  }
  MatrixField sample(const std::vector<Quaternion>& nodes) const {
    MatrixField out(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) out[n] = (*this)(nodes[n]);
    return out;
  }

 private:
  double amplitude_;
  std::array<QuaternionFunction, 9> entries_;
};

}  // namespace hf::testing_support
