#pragma once

#include <cmath>

#include <Eigen/Core>

namespace hf {

/// Quaternion q = w + x*i + y*j + z*k. Points of S^3 are the unit ones.
struct Quaternion {
  double w{1.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_) : w{w_}, x{x_}, y{y_}, z{z_} {}

  static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  /// Imaginary unit e_a, a in {1,2,3}.
  static constexpr Quaternion unit(int a) {
    return {0.0, a == 1 ? 1.0 : 0.0, a == 2 ? 1.0 : 0.0, a == 3 ? 1.0 : 0.0};
  }

  constexpr Quaternion conj() const { return {w, -x, -y, -z}; }
  constexpr double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }

  Quaternion normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Eigen::Vector4d vec() const { return {w, x, y, z}; }
  static Quaternion from_vec(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }

  constexpr Quaternion operator*(const Quaternion& r) const {
    return {w * r.w - x * r.x - y * r.y - z * r.z,
            w * r.x + x * r.w + y * r.z - z * r.y,
            w * r.y - x * r.z + y * r.w + z * r.x,
            w * r.z + x * r.y - y * r.x + z * r.w};
  }
  constexpr Quaternion operator+(const Quaternion& r) const { return {w + r.w, x + r.x, y + r.y, z + r.z}; }
  constexpr Quaternion operator-(const Quaternion& r) const { return {w - r.w, x - r.x, y - r.y, z - r.z}; }
  constexpr Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }
};

/// exp(t * e_a) = cos t + sin t e_a.
inline Quaternion exp_unit(int a, double t) {
  Quaternion q = Quaternion::unit(a) * std::sin(t);
  q.w = std::cos(t);
  return q;
}

/// Integer power; negative powers go through the conjugate (unit input assumed).
inline Quaternion pow(const Quaternion& q, int k) {
  Quaternion base = k < 0 ? q.conj() : q;
  Quaternion out = Quaternion::identity();
  for (int n = k < 0 ? -k : k; n > 0; --n) out = out * base;
  return out;
}

/// Rotation v -> q v q^* of the imaginary quaternions: the 2:1 covering S^3 -> SO(3).
inline Eigen::Matrix3d rotation_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace hf
