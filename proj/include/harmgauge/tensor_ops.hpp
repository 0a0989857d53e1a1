#pragma once

#include <utility>

#include "harmgauge/metric.hpp"

namespace hgauge {

/// Analytic: direct finite-difference formula, used for residual diagnostics.
/// Adjoint: exact discrete transpose of the matching first-order operator with
/// respect to l2_inner, used inside solves and quadratic forms.
enum class OperatorMode { Analytic, Adjoint };

/// Sign conventions: delta theta = -g^{ij} nabla_i theta_j and
/// (delta h)_j = -g^{ik} nabla_i h_kj, so that trace(delta* theta) = -delta theta.

/// (delta* theta)_ij = sym(nabla theta)_ij = 1/2 L_{theta#} g
Sym2Field delta_star(const CovectorField& theta, const GeometryCache& geo);

/// Adjoint mode: exact transpose of delta_star.
CovectorField divergence(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode);
/// Adjoint mode: exact transpose of exterior_derivative.
ScalarField divergence(const CovectorField& theta, const GeometryCache& geo, OperatorMode mode);

CovectorField exterior_derivative(const ScalarField& f);

ScalarField trace(const Sym2Field& h, const GeometryCache& geo);
/// (g^{ij} h_ij, h - (tr/n) g)
std::pair<ScalarField, Sym2Field> trace_and_tracefree(const Sym2Field& h, const GeometryCache& geo);
Sym2Field times_metric(const ScalarField& lambda, const GeometryCache& geo);

/// 2 delta delta* - d delta
CovectorField sampson_laplacian(const CovectorField& theta, const GeometryCache& geo,
                                OperatorMode mode = OperatorMode::Analytic);

/// Transpose of the covariant derivative on Sym2 fields (nabla*).
Sym2Field covariant_derivative_adjoint(const Sym2GradField& t, const GeometryCache& geo);

/// trace_g nabla^2 h. Analytic: two nested covariant derivatives. Adjoint: -nabla* nabla h.
Sym2Field rough_laplacian(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode = OperatorMode::Analytic);

/// Delta h + 2 R_{ikjl} h^{kl} - R_i^k h_kj - R_j^k h_ik
Sym2Field lichnerowicz(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode = OperatorMode::Analytic);

/// Curvature operator of the second kind, R(h)_ij = R_{ikjl} h^{kl}.
Sym2Field curv2k_apply(const Sym2Field& h, const GeometryCache& geo);

/// alpha(theta) = delta* theta + 1/2 (delta theta) g
Sym2Field alpha_apply(const CovectorField& theta, const GeometryCache& geo, OperatorMode mode = OperatorMode::Analytic);
/// alpha*(h) = delta h + 1/2 d(trace_g h); its kernel is the harmonic slice.
CovectorField alpha_star_apply(const Sym2Field& h, const GeometryCache& geo,
                               OperatorMode mode = OperatorMode::Analytic);

}  // namespace hgauge
