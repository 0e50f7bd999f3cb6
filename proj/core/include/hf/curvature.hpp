#pragma once

#include <span>
#include <string_view>

#include "hf/fields.hpp"
#include "hf/framing.hpp"

namespace hf {

/// Which trace of the linear curvature drives the flow.
///
///   div_k          H^k_j = sum_i R^k_{ji,i} = sum_i X_i(C^k_{ji})
///   div_k_reversed H^k_j = sum_i R^k_{ij,i}  (= -div_k)
///   trace_i        H^k_j = sum_l R^l_{lj,k}
///
/// div_k is dissipative: its linearization about a flat framing has
/// principal symbol -|xi|^2 (I - xi xi^T / |xi|^2). div_k_reversed is the
/// backward-parabolic orientation, kept for experiments.
enum class Contraction { div_k, div_k_reversed, trace_i };

std::string_view to_string(Contraction c);
/// Throws InvalidArgument on an unknown name.
Contraction contraction_from_string(std::string_view name);

/// C^k_{ij} of [X_i, X_j] = C^k_{ij} X_k, X_i = B^a_i E_a, B = A^{-1}.
StructureField structure_functions(const Framing& w);

/// R^k_{ij,l} = X_l(C^k_{ij}).
CurvatureField linear_curvature(const Framing& w);

struct CurvatureBundle {
  StructureField structure;
  CurvatureField curvature;
};

/// C and R together, sharing the inverse frame.
CurvatureBundle curvature_bundle(const Framing& w);

/// Contracts an assembled curvature field.
HField contract(const CurvatureField& r, Contraction contraction);

HField h_tensor(const Framing& w, Contraction contraction = Contraction::div_k);

struct FieldNorms {
  double sup = 0.0;
  double l2 = 0.0;
};

/// sup over nodes of the per-node Frobenius norm, and the L2 norm
/// sqrt(integral of its square). `components` values per node.
FieldNorms field_norms(const Grid& grid, std::span<const double> flat, std::size_t components);
FieldNorms field_norms(const Grid& grid, const MatrixField& f);
FieldNorms field_norms(const Grid& grid, const StructureField& f);
FieldNorms field_norms(const Grid& grid, const CurvatureField& f);

/// Quadrature-weighted mean of C over S^3.
StructureComponents mean_structure(const Grid& grid, const StructureField& c);

/// sup over nodes of |C(x) - mean|_F.
double structure_variation(const Grid& grid, const StructureField& c);

}  // namespace hf
