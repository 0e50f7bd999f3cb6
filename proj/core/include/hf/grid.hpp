#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "hf/fields.hpp"
#include "hf/quaternion.hpp"

namespace hf {

namespace detail {
class LineTransforms;
}

/// Tensor-product grid on S^3 in Euler ZYZ angles,
///
///   q(alpha, beta, gamma) = exp(alpha/2 k) exp(beta/2 j) exp(gamma/2 k),
///
/// alpha equispaced on [0, 2pi), gamma equispaced on [0, 4pi), beta at
/// Gauss-Legendre nodes mapped linearly onto (0, pi). Node layout is
/// alpha-major, gamma fastest.
///
/// q is anti-periodic under alpha -> alpha + 2pi, and that shift agrees with
/// gamma -> gamma + 2pi. Differentiation along alpha therefore runs over the
/// 4pi-periodic line stitched together from two gamma columns.
class Grid {
 public:
  static constexpr int kMinCount = 4;

  /// Throws InvalidArgument for counts below 4 or odd alpha/gamma counts.
  Grid(int n_alpha, int n_beta, int n_gamma);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n_alpha() const { return n_alpha_; }
  int n_beta() const { return n_beta_; }
  int n_gamma() const { return n_gamma_; }
  std::size_t size() const { return nodes_.size(); }

  std::size_t index(int ia, int ib, int ig) const {
    return (static_cast<std::size_t>(ia) * n_beta_ + ib) * n_gamma_ + ig;
  }

  double alpha(int ia) const { return alpha_[ia]; }
  double beta(int ib) const { return beta_[ib]; }
  double gamma(int ig) const { return gamma_[ig]; }
  /// Plain Gauss-Legendre weights of the beta nodes on (0, pi), no sin factor.
  const std::vector<double>& beta_weights() const { return beta_weights_; }

  const std::vector<Quaternion>& nodes() const { return nodes_; }
  const Quaternion& node(std::size_t n) const { return nodes_[n]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Column a holds the (d/dalpha, d/dbeta, d/dgamma) components of E_a(q) = q e_a.
  const Matrix3& frame_change(std::size_t n) const { return frame_change_[n]; }

  /// Haar quadrature, sum of weights * f.
  double integrate(const ScalarField& f) const;

  /// (d/dalpha, d/dbeta, d/dgamma) of f.
  std::array<ScalarField, 3> partials(const ScalarField& f) const;

  /// E_a(f) for a in {1, 2, 3}.
  ScalarField frame_derivative(const ScalarField& f, int a) const;

  /// E_1(f), E_2(f), E_3(f), sharing one set of partials.
  std::array<ScalarField, 3> frame_derivatives(const ScalarField& f) const;

  /// Samples a function of the node quaternion.
  template <typename F>
  ScalarField sample(F&& fn) const {
    ScalarField out(size());
    for (std::size_t n = 0; n < size(); ++n) out[n] = fn(nodes_[n]);
    return out;
  }

  void check_shape(std::size_t field_size) const;

 private:
  ScalarField d_alpha(const ScalarField& f) const;
  ScalarField d_beta(const ScalarField& f) const;
  ScalarField d_gamma(const ScalarField& f) const;

  int n_alpha_;
  int n_beta_;
  int n_gamma_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<double> gamma_;
  std::vector<double> beta_weights_;
  std::vector<double> beta_diff_;  // n_beta x n_beta, row-major
  std::vector<Quaternion> nodes_;
  std::vector<double> weights_;
  MatrixField frame_change_;
  std::unique_ptr<detail::LineTransforms> transforms_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds an immutable shared grid.
GridPtr build_grid(int n_alpha, int n_beta, int n_gamma);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Orthogonal projection onto functions spanned by Wigner D^j with j <= band.
///
/// A field on S^3 expands in Fourier modes exp(i(m alpha + n gamma)) with
/// half-integer m, n; the beta profile of mode (m, n) lies in the span of
/// sin(beta/2)^|m-n| cos(beta/2)^|m+n| cos(beta)^p, p <= j - max(|m|,|n|).
/// The projection is exact with respect to the discrete quadrature inner
/// product, so it is idempotent to rounding.
class BandLimiter {
 public:
  BandLimiter(GridPtr grid, int band);
  ~BandLimiter();
  BandLimiter(const BandLimiter&) = delete;
  BandLimiter& operator=(const BandLimiter&) = delete;

  int band() const { return band_; }
  const Grid& grid() const { return *grid_; }

  ScalarField apply(const ScalarField& f) const;
  MatrixField apply(const MatrixField& f) const;

  /// Largest band resolved by the grid without touching Nyquist modes, with
  /// headroom for quadratic products.
  static int auto_band(const Grid& grid);

 private:
  struct Impl;
  GridPtr grid_;
  int band_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hf
