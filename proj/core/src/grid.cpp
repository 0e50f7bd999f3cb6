#include "hf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Dense>
#include <fftw3.h>

#include "hf/errors.hpp"

namespace hf {

namespace {

constexpr double kPi = std::numbers::pi;

// The FFTW planner is not thread safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwDeleter> fftw_buffer(std::size_t n) {
  return std::unique_ptr<T[], FftwDeleter>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

/// Spectral derivative of one real periodic line.
class PeriodicLine {
 public:
  PeriodicLine(int n, double period) : n_{n}, scale_{2.0 * kPi / period} {
    auto in = fftw_buffer<double>(n);
    auto out = fftw_buffer<fftw_complex>(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, out.get(), in.get(), FFTW_ESTIMATE);
  }
  ~PeriodicLine() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  PeriodicLine(const PeriodicLine&) = delete;
  PeriodicLine& operator=(const PeriodicLine&) = delete;

  int size() const { return n_; }

  /// In-place derivative; `spec` is scratch of n/2 + 1 entries.
  void differentiate(double* line, fftw_complex* spec) const {
    fftw_execute_dft_r2c(forward_, line, spec);
    const int half = n_ / 2;
    for (int k = 0; k <= half; ++k) {
      const double f = (k == half) ? 0.0 : scale_ * k / n_;
      const double re = spec[k][0];
      spec[k][0] = -f * spec[k][1];
      spec[k][1] = f * re;
    }
    fftw_execute_dft_c2r(backward_, spec, line);
  }

 private:
  int n_;
  double scale_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace

namespace detail {
class LineTransforms {
 public:
  LineTransforms(int n_alpha, int n_gamma) : alpha_(2 * n_alpha, 4.0 * kPi), gamma_(n_gamma, 4.0 * kPi) {}
  PeriodicLine alpha_;
  PeriodicLine gamma_;
};
}  // namespace detail

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

Grid::Grid(int n_alpha, int n_beta, int n_gamma) : n_alpha_{n_alpha}, n_beta_{n_beta}, n_gamma_{n_gamma} {
  if (n_alpha < kMinCount || n_beta < kMinCount || n_gamma < kMinCount) {
    throw InvalidArgument("grid counts must be at least 4");
  }
  if (n_alpha % 2 != 0 || n_gamma % 2 != 0) {
    throw InvalidArgument("n_alpha and n_gamma must be even");
  }

  alpha_.resize(n_alpha);
  for (int i = 0; i < n_alpha; ++i) alpha_[i] = 2.0 * kPi * i / n_alpha;
  gamma_.resize(n_gamma);
  for (int i = 0; i < n_gamma; ++i) gamma_[i] = 4.0 * kPi * i / n_gamma;

  std::vector<double> x;
  gauss_legendre(n_beta, x, beta_weights_);
  beta_.resize(n_beta);
  for (int i = 0; i < n_beta; ++i) {
    beta_[i] = 0.5 * kPi * (x[i] + 1.0);
    beta_weights_[i] *= 0.5 * kPi;
  }

  // Barycentric differentiation matrix on the beta nodes.
  std::vector<double> bary(n_beta, 1.0);
  for (int j = 0; j < n_beta; ++j) {
    for (int k = 0; k < n_beta; ++k) {
      if (k != j) bary[j] *= (beta_[j] - beta_[k]);
    }
    bary[j] = 1.0 / bary[j];
  }
  beta_diff_.assign(static_cast<std::size_t>(n_beta) * n_beta, 0.0);
  for (int i = 0; i < n_beta; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n_beta; ++j) {
      if (i == j) continue;
      const double d = (bary[j] / bary[i]) / (beta_[i] - beta_[j]);
      beta_diff_[i * n_beta + j] = d;
      diag -= d;
    }
    beta_diff_[i * n_beta + i] = diag;
  }

  const std::size_t total = static_cast<std::size_t>(n_alpha) * n_beta * n_gamma;
  nodes_.resize(total);
  weights_.resize(total);
  frame_change_.resize(total);
  const double cell = (2.0 * kPi / n_alpha) * (4.0 * kPi / n_gamma) / 8.0;
  const Quaternion half_k = Quaternion::unit(3) * 0.5;
  const Quaternion half_j = Quaternion::unit(2) * 0.5;

  for (int ia = 0; ia < n_alpha; ++ia) {
    const Quaternion qa = exp_unit(3, 0.5 * alpha_[ia]);
    for (int ib = 0; ib < n_beta; ++ib) {
      const Quaternion qb = exp_unit(2, 0.5 * beta_[ib]);
      for (int ig = 0; ig < n_gamma; ++ig) {
        const Quaternion qg = exp_unit(3, 0.5 * gamma_[ig]);
        const std::size_t n = index(ia, ib, ig);
        const Quaternion q = qa * qb * qg;
        nodes_[n] = q;
        weights_[n] = cell * std::sin(beta_[ib]) * beta_weights_[ib];

        Eigen::Matrix<double, 4, 3> jac;
        jac.col(0) = (half_k * q).vec();
        jac.col(1) = (qa * half_j * qb * qg).vec();
        jac.col(2) = (q * half_k).vec();
        Eigen::Matrix<double, 4, 3> frame;
        for (int a = 0; a < 3; ++a) frame.col(a) = (q * Quaternion::unit(a + 1)).vec();

        const Matrix3 normal = jac.transpose() * jac;
        const Matrix3 m = normal.ldlt().solve(jac.transpose() * frame);
        const double residual = (jac * m - frame).cwiseAbs().maxCoeff();
        if (!(residual <= 1e-9) || !(std::abs(m.determinant()) > 1e-10)) {
          throw InvalidArgument("frame change solve failed at node " + std::to_string(n) +
                                " (residual " + std::to_string(residual) + ")");
        }
        frame_change_[n] = m;
      }
    }
  }

  transforms_ = std::make_unique<detail::LineTransforms>(n_alpha, n_gamma);
}

Grid::~Grid() = default;

void Grid::check_shape(std::size_t field_size) const {
  if (field_size != size()) {
    throw InvalidArgument("field has " + std::to_string(field_size) + " nodes, grid has " +
                          std::to_string(size()));
  }
}

double Grid::integrate(const ScalarField& f) const {
  check_shape(f.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) sum += weights_[n] * f[n];
  return sum;
}

ScalarField Grid::d_alpha(const ScalarField& f) const {
  const PeriodicLine& op = transforms_->alpha_;
  auto line = fftw_buffer<double>(op.size());
  auto spec = fftw_buffer<fftw_complex>(op.size() / 2 + 1);
  ScalarField out(f.size());
  const int shift = n_gamma_ / 2;
  for (int ib = 0; ib < n_beta_; ++ib) {
    for (int ig = 0; ig < shift; ++ig) {
      for (int ia = 0; ia < n_alpha_; ++ia) {
        line[ia] = f[index(ia, ib, ig)];
        line[n_alpha_ + ia] = f[index(ia, ib, ig + shift)];
      }
      op.differentiate(line.get(), spec.get());
      for (int ia = 0; ia < n_alpha_; ++ia) {
        out[index(ia, ib, ig)] = line[ia];
        out[index(ia, ib, ig + shift)] = line[n_alpha_ + ia];
      }
    }
  }
  return out;
}

ScalarField Grid::d_gamma(const ScalarField& f) const {
  const PeriodicLine& op = transforms_->gamma_;
  auto line = fftw_buffer<double>(op.size());
  auto spec = fftw_buffer<fftw_complex>(op.size() / 2 + 1);
  ScalarField out(f.size());
  for (int ia = 0; ia < n_alpha_; ++ia) {
    for (int ib = 0; ib < n_beta_; ++ib) {
      const std::size_t base = index(ia, ib, 0);
      std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(base), n_gamma_, line.get());
      op.differentiate(line.get(), spec.get());
      std::copy_n(line.get(), n_gamma_, out.begin() + static_cast<std::ptrdiff_t>(base));
    }
  }
  return out;
}

ScalarField Grid::d_beta(const ScalarField& f) const {
  ScalarField out(f.size(), 0.0);
  for (int ia = 0; ia < n_alpha_; ++ia) {
    for (int ib = 0; ib < n_beta_; ++ib) {
      const double* row = &beta_diff_[static_cast<std::size_t>(ib) * n_beta_];
      for (int ig = 0; ig < n_gamma_; ++ig) {
        const double fi = f[index(ia, ib, ig)];
        double acc = 0.0;
        // Differences against the diagonal value: constants map to exact zero.
        for (int jb = 0; jb < n_beta_; ++jb) {
          if (jb != ib) acc += row[jb] * (f[index(ia, jb, ig)] - fi);
        }
        out[index(ia, ib, ig)] = acc;
      }
    }
  }
  return out;
}

std::array<ScalarField, 3> Grid::partials(const ScalarField& f) const {
  check_shape(f.size());
  return {d_alpha(f), d_beta(f), d_gamma(f)};
}

std::array<ScalarField, 3> Grid::frame_derivatives(const ScalarField& f) const {
  const auto p = partials(f);
  std::array<ScalarField, 3> out;
  for (auto& o : out) o.resize(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const Matrix3& m = frame_change_[n];
    for (int a = 0; a < 3; ++a) {
      out[a][n] = m(0, a) * p[0][n] + m(1, a) * p[1][n] + m(2, a) * p[2][n];
    }
  }
  return out;
}

ScalarField Grid::frame_derivative(const ScalarField& f, int a) const {
  if (a < 1 || a > 3) throw InvalidArgument("frame axis must be 1, 2 or 3");
  auto all = frame_derivatives(f);
  return std::move(all[a - 1]);
}

GridPtr build_grid(int n_alpha, int n_beta, int n_gamma) {
  return std::make_shared<const Grid>(n_alpha, n_beta, n_gamma);
}

// ---------------------------------------------------------------------------
// BandLimiter

struct BandLimiter::Impl {
  int rows = 0;  // extended alpha length
  int cols = 0;  // gamma length
  int half_cols = 0;
  fftw_plan forward{};
  fftw_plan backward{};
  // Per spectral cell (p, r), index into projectors or -1 for "zero it".
  std::vector<int> cell_projector;
  std::vector<Eigen::MatrixXd> projectors;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

int BandLimiter::auto_band(const Grid& grid) {
  const int limit = std::min({grid.n_alpha(), grid.n_gamma() / 2, grid.n_beta()});
  return std::max(1, limit / 4);
}

BandLimiter::BandLimiter(GridPtr grid, int band) : grid_{std::move(grid)}, band_{band}, impl_{std::make_unique<Impl>()} {
  const Grid& g = *grid_;
  if (band < 0 || 2 * band >= g.n_alpha() || 2 * band >= g.n_gamma() / 2) {
    throw InvalidArgument("band limit " + std::to_string(band) + " not resolved by the grid");
  }
  Impl& im = *impl_;
  im.rows = 2 * g.n_alpha();
  im.cols = g.n_gamma();
  im.half_cols = im.cols / 2 + 1;

  {
    auto real = fftw_buffer<double>(static_cast<std::size_t>(im.rows) * im.cols);
    auto spec = fftw_buffer<fftw_complex>(static_cast<std::size_t>(im.rows) * im.half_cols);
    std::lock_guard lock(planner_mutex());
    im.forward = fftw_plan_dft_r2c_2d(im.rows, im.cols, real.get(), spec.get(), FFTW_ESTIMATE);
    im.backward = fftw_plan_dft_c2r_2d(im.rows, im.cols, spec.get(), real.get(), FFTW_ESTIMATE);
  }

  const int nb = g.n_beta();
  Eigen::VectorXd sqrt_w(nb);
  for (int ib = 0; ib < nb; ++ib) sqrt_w[ib] = std::sqrt(g.beta_weights()[ib] * std::sin(g.beta(ib)));

  std::map<std::tuple<int, int, int>, int> cache;
  im.cell_projector.assign(static_cast<std::size_t>(im.rows) * im.half_cols, -1);
  const int n_alpha = g.n_alpha();
  for (int p = 0; p < im.rows; ++p) {
    if (p == n_alpha) continue;  // Nyquist
    const int ka = p < n_alpha ? p : p - im.rows;
    for (int r = 0; r < im.half_cols; ++r) {
      if (r == im.cols / 2) continue;  // Nyquist
      const int kg = r;
      if ((ka - kg) % 2 != 0) continue;
      const int mu2 = std::max(std::abs(ka), std::abs(kg));
      if (mu2 > 2 * band) continue;
      const int a = std::abs(ka - kg) / 2;
      const int b = std::abs(ka + kg) / 2;
      const int count = std::min(nb, (2 * band - mu2) / 2 + 1);
      const auto key = std::make_tuple(a, b, count);
      auto it = cache.find(key);
      if (it == cache.end()) {
        Eigen::MatrixXd basis(nb, count);
        for (int ib = 0; ib < nb; ++ib) {
          const double beta = g.beta(ib);
          const double lead = std::pow(std::sin(0.5 * beta), a) * std::pow(std::cos(0.5 * beta), b);
          for (int k = 0; k < count; ++k) basis(ib, k) = sqrt_w[ib] * lead * std::pow(std::cos(beta), k);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(nb, count);
        Eigen::MatrixXd proj = q * q.transpose();
        for (int i = 0; i < nb; ++i) {
          for (int j = 0; j < nb; ++j) proj(i, j) *= sqrt_w[j] / sqrt_w[i];
        }
        im.projectors.push_back(std::move(proj));
        it = cache.emplace(key, static_cast<int>(im.projectors.size()) - 1).first;
      }
      im.cell_projector[static_cast<std::size_t>(p) * im.half_cols + r] = it->second;
    }
  }
}

BandLimiter::~BandLimiter() = default;

ScalarField BandLimiter::apply(const ScalarField& f) const {
  const Grid& g = *grid_;
  g.check_shape(f.size());
  const Impl& im = *impl_;
  const int na = g.n_alpha(), nb = g.n_beta(), ng = g.n_gamma();
  const int shift = ng / 2;
  const std::size_t plane_real = static_cast<std::size_t>(im.rows) * im.cols;
  const std::size_t plane_spec = static_cast<std::size_t>(im.rows) * im.half_cols;

  auto real = fftw_buffer<double>(plane_real);
  std::vector<std::complex<double>> spectra(plane_spec * nb);
  auto spec = fftw_buffer<fftw_complex>(plane_spec);

  for (int ib = 0; ib < nb; ++ib) {
    for (int p = 0; p < im.rows; ++p) {
      for (int r = 0; r < ng; ++r) {
        const double v = p < na ? f[g.index(p, ib, r)] : f[g.index(p - na, ib, (r + shift) % ng)];
        real[static_cast<std::size_t>(p) * im.cols + r] = v;
      }
    }
    fftw_execute_dft_r2c(im.forward, real.get(), spec.get());
    for (std::size_t c = 0; c < plane_spec; ++c) spectra[c * nb + ib] = {spec[c][0], spec[c][1]};
  }

  Eigen::VectorXcd column(nb);
  for (std::size_t c = 0; c < plane_spec; ++c) {
    std::complex<double>* col = &spectra[c * nb];
    const int which = im.cell_projector[c];
    if (which < 0) {
      std::fill(col, col + nb, std::complex<double>{});
      continue;
    }
    for (int ib = 0; ib < nb; ++ib) column[ib] = col[ib];
    const Eigen::VectorXcd projected = im.projectors[which] * column;
    for (int ib = 0; ib < nb; ++ib) col[ib] = projected[ib];
  }

  ScalarField out(f.size());
  const double norm = 1.0 / static_cast<double>(plane_real);
  for (int ib = 0; ib < nb; ++ib) {
    for (std::size_t c = 0; c < plane_spec; ++c) {
      spec[c][0] = spectra[c * nb + ib].real();
      spec[c][1] = spectra[c * nb + ib].imag();
    }
    fftw_execute_dft_c2r(im.backward, spec.get(), real.get());
    for (int ia = 0; ia < na; ++ia) {
      for (int ig = 0; ig < ng; ++ig) out[g.index(ia, ib, ig)] = norm * real[static_cast<std::size_t>(ia) * im.cols + ig];
    }
  }
  return out;
}

MatrixField BandLimiter::apply(const MatrixField& f) const {
  MatrixField out(f.size());
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const ScalarField filtered = apply(component(f, r, c));
      for (std::size_t n = 0; n < f.size(); ++n) out[n](r, c) = filtered[n];
    }
  }
  return out;
}

}  // namespace hf
