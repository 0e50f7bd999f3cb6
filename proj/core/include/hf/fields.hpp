#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/StdVector>

namespace hf {

using Matrix3 = Eigen::Matrix3d;

using ScalarField = std::vector<double>;
using MatrixField = std::vector<Matrix3, Eigen::aligned_allocator<Matrix3>>;

/// C^k_{ij} per node, flat index k*9 + i*3 + j.
using StructureComponents = std::array<double, 27>;
using StructureField = std::vector<StructureComponents>;

/// R^k_{ij,l} per node, flat index ((k*3 + i)*3 + j)*3 + l.
using CurvatureComponents = std::array<double, 81>;
using CurvatureField = std::vector<CurvatureComponents>;

/// H^k_j per node, row k, column j.
using HField = MatrixField;

constexpr std::size_t sidx(int k, int i, int j) { return static_cast<std::size_t>(k * 9 + i * 3 + j); }
constexpr std::size_t ridx(int k, int i, int j, int l) {
  return static_cast<std::size_t>(((k * 3 + i) * 3 + j) * 3 + l);
}

/// Levi-Civita symbol on 0-based indices.
constexpr double levi_civita(int a, int b, int c) {
  return static_cast<double>((a - b) * (b - c) * (c - a)) / 2.0;
}

/// Entry (r, c) of every matrix in the field, as a scalar field.
inline ScalarField component(const MatrixField& m, int r, int c) {
  ScalarField out(m.size());
  for (std::size_t n = 0; n < m.size(); ++n) out[n] = m[n](r, c);
  return out;
}

inline MatrixField constant_field(std::size_t nodes, const Matrix3& value) { return MatrixField(nodes, value); }

}  // namespace hf
