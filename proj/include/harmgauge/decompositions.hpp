#pragma once

#include <string>
#include <vector>

#include "harmgauge/elliptic.hpp"
#include "harmgauge/tensor_ops.hpp"

namespace hgauge {

/// A decomposition solve failed; carries the solver report.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

inline constexpr int kDefaultMaxIterations = 20000;

/// phi = delta* theta + phi0, delta phi0 = 0.
struct BergerEbinParts {
  CovectorField theta;
  Sym2Field divergence_free;
  SolveReport solve;
};

/// phi = delta* theta + lambda g + phi_tt.
struct YorkParts {
  CovectorField theta;
  ScalarField lambda;
  Sym2Field transverse_traceless;
  SolveReport solve;
  bool outside_stated_range = false;  ///< n = 2: computed, but the theory assumes n >= 3
};

/// phi = alpha(theta) + phi_h, alpha* phi_h = 0.
struct ChenParts {
  CovectorField theta;
  Sym2Field harmonic;
  SolveReport solve;
  double post_check = 0.0;  ///< ||alpha* phi_h|| measured after the solve
};

/// Exact discrete kernel shared by delta*, the York operator and alpha on a
/// constant metric: each component times a constant or checkerboard pattern.
/// Empty for non-constant metrics.
std::vector<CovectorField> covector_kernel_basis(const GeometryCache& geo);

/// Approximate kernel of the two-dimensional York operator (conformal Killing
/// fields) on a non-constant metric; the exact parity kernel otherwise.
std::vector<CovectorField> conformal_killing_basis(const GeometryCache& geo);

BergerEbinParts berger_ebin(const Sym2Field& phi, const GeometryCache& geo, double tol,
                            int max_iter = kDefaultMaxIterations);
YorkParts york(const Sym2Field& phi, const GeometryCache& geo, double tol, int max_iter = kDefaultMaxIterations);
ChenParts chen(const Sym2Field& phi, const GeometryCache& geo, double tol, int max_iter = kDefaultMaxIterations);

/// Orthonormal basis of the discrete harmonic slice spanned by projections of
/// all band-limited Sym2 modes up to max_mode. Element 0 is g / ||g||.
/// Projected vectors whose Gram-Schmidt remainder is below sqrt(tol) of their
/// pre-orthogonalization norm are dropped.
std::vector<Sym2Field> hg_basis(const GeometryCache& geo, int max_mode, double tol);

/// ||Sampson(theta)|| / max(||theta||, 1) in rms norms: relative for large theta,
/// absolute for the small gauge fields of near-linear maps.
double ihp_residual(const CovectorField& theta, const GeometryCache& geo);

}  // namespace hgauge
