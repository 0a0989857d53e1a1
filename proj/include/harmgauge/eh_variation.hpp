#pragma once

#include <array>
#include <optional>
#include <vector>

#include "harmgauge/decompositions.hpp"
#include "harmgauge/site_algebra.hpp"

namespace hgauge {

/// Integral of Scal dV_g.
double eh_functional(const GeometryCache& geo);

/// Ric - 1/2 Scal g
Sym2Field einstein_tensor(const GeometryCache& geo);

struct VariationReport {
  double analytic = 0.0;        ///< -<Ein, h>
  double fd = 0.0;              ///< Richardson-extrapolated central difference
  double fd_error = 0.0;        ///< |extrapolated - finer central difference|
  double theorem4_value = 0.0;  ///< -<Ric, h>
  double theorem4_gap = 0.0;    ///< analytic - theorem4_value
  double gap_direct = 0.0;      ///< 1/2 integral of Scal tr h dV
  double t = 0.0;               ///< coarse step; the fine step is t / 2
};

/// Default probe step 1e-3 ||g|| / ||h||, halved up to four times while g +- t h
/// fails to be positive definite.
double default_probe_step(const GeometryCache& geo, const Sym2Field& h);

/// t <= 0 selects the default step. Throws DomainError if no admissible step is found.
VariationReport first_variation(const GeometryCache& geo, const Sym2Field& h, double t = 0.0);

/// ||alpha* h|| / ||h|| with the analytic divergence.
double chen_membership(const Sym2Field& h, const GeometryCache& geo);

struct LadderRung {
  double t = 0.0;
  double tension = 0.0;   ///< ||tau|| of id : (M, g) -> (M, g + t h)
  double identity = 0.0;  ///< norm of the pullback identity residual for that map
};

struct MembershipLadder {
  double membership = 0.0;
  std::vector<LadderRung> rungs;
  double tension_order = 0.0;  ///< least-squares slope of log tension against log t
};

/// Deforms the target of the identity map along h for each t.
MembershipLadder chen_membership_ladder(const Sym2Field& h, const GeometryCache& geo, const std::vector<double>& ts);

/// Delta_L h + R(h) with the adjoint-mode Lichnerowicz Laplacian.
Sym2Field lh_apply(const Sym2Field& h, const GeometryCache& geo);

struct SpectrumReport {
  int basis_size = 0;
  std::vector<double> fd_eigenvalues;   ///< ascending
  std::vector<double> op_eigenvalues;   ///< ascending
  double fd_symmetry_defect = 0.0;      ///< before symmetrization
  double op_symmetry_defect = 0.0;
  double discrepancy = 0.0;             ///< ||H_fd - H_op||_F
  double metric_rayleigh_fd = 0.0;      ///< H_fd(g/|g|, g/|g|)
  double metric_rayleigh_op = 0.0;
  double scaling_second_derivative = 0.0;  ///< (n/2-1)(n/2-2) E / ||g||^2
  std::optional<double> complement_min_fd;  ///< smallest eigenvalue orthogonal to the g-direction
  std::optional<double> complement_min_op;
  DenseMatrix fd_matrix, op_matrix;     ///< symmetrized
  double t = 0.0;
};

/// Element 0 of the basis is taken as the g-direction when it is parallel to g.
/// t <= 0 selects the default probe step for unit basis vectors.
SpectrumReport hessian_on_slice(const GeometryCache& geo, const std::vector<Sym2Field>& basis, double t = 0.0);

/// Riemann data at one point: metric and R_{abcd}, index ((a*n+b)*n+c)*n+d.
struct CurvaturePoint {
  int n = 0;
  site::Mat g{};
  std::array<double, 81> r{};
};

/// kappa (g_ac g_bd - g_ad g_bc): sectional curvature kappa.
CurvaturePoint constant_curvature(int n, double kappa, const site::Mat& g);
CurvaturePoint curvature_at(const GeometryCache& geo, std::size_t site);

struct Curv2kEigen {
  std::vector<double> full;        ///< on Sym2, ascending
  std::vector<double> trace_free;  ///< compressed to trace-free tensors, ascending
  double pure_trace = 0.0;         ///< Rayleigh quotient of g
};

/// Eigenvalues of h -> R_{ikjl} h^{kl} in a g-orthonormal frame.
Curv2kEigen curv2k_eigen(const CurvaturePoint& p);

struct Curv2kSpectrum {
  std::vector<Curv2kEigen> sites;
  double min_trace_free = 0.0;  ///< c in g(R(h), h) >= c |h|^2
  bool positive = false;
};

/// site = nullopt evaluates every site.
Curv2kSpectrum curv2k_spectrum(const GeometryCache& geo, std::optional<std::size_t> site = std::nullopt);
Curv2kSpectrum curv2k_spectrum(const std::vector<CurvaturePoint>& points);

/// g(R(h), h) at a point for a symmetric h.
double curvature_pairing(const CurvaturePoint& p, const site::Mat& h);

struct KernelProbe {
  double rayleigh = 0.0;           ///< <L_H h, h> / <h, h>
  bool admissible = false;         ///< rayleigh within tol
  double parallel_defect = 0.0;    ///< ||nabla h|| / ||h||
  double proportional_defect = 0.0;  ///< ||h - c g|| / ||h|| with c the best fit
  double curvature_min = 0.0;      ///< pointwise min of g(R(h), h)
  double curvature_max = 0.0;
  bool parallel = false;
  bool proportional = false;
  bool curvature_vanishes = false;
};

struct Theorem6Report {
  std::vector<KernelProbe> candidates;
  bool nonnegative_curvature = false;
  /// Every admissible candidate is parallel with vanishing R-pairing when the
  /// curvature is nonnegative; proportionality is reported separately.
  bool consistent = false;
};

Theorem6Report theorem6_probe(const GeometryCache& geo, const std::vector<Sym2Field>& candidates, double tol);

}  // namespace hgauge
