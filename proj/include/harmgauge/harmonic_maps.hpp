#pragma once

#include <functional>
#include <vector>

#include "harmgauge/decompositions.hpp"
#include "harmgauge/site_algebra.hpp"

namespace hgauge {

/// f(x) = B x + u(x) with B_ai = A_ai * Lbar_a / L_i, A the integer winding
/// matrix (target dim x source dim) and u periodic on the source lattice.
struct TorusMap {
  Lattice source;
  int target_dim = 0;
  std::vector<double> target_periods;
  std::vector<std::vector<int>> winding;  ///< winding[a][i]
  MapField displacement;                  ///< u^a, target_dim components

  /// Zero displacement with the given winding; target periods default to 2 pi.
  static TorusMap linear(const Lattice& source, std::vector<std::vector<int>> winding,
                         std::vector<double> target_periods = {});
  static TorusMap identity(const Lattice& source);
  /// Constant map to the point y (A = 0, u = y).
  static TorusMap constant(const Lattice& source, const std::vector<double>& y);

  double slope(int a, int i) const;
  /// f^a at a site, not reduced modulo the target periods.
  double value(int a, std::size_t site) const;
  void validate() const;
};

/// Target metric given in closed form, evaluated at unreduced target points.
class TargetMetric {
 public:
  using MetricFn = std::function<site::Mat(const site::Vec&)>;
  /// gamma[a][b][c] = Gammabar^a_bc
  using ChristoffelFn = std::function<std::array<site::Mat, 3>(const site::Vec&)>;

  static TargetMetric constant(const site::Mat& g, int dim);
  static TargetMetric flat(int dim);
  /// Arbitrary closed form; the caller supplies consistent Christoffels.
  static TargetMetric general(int dim, MetricFn metric, ChristoffelFn christoffel);
  /// e^{2w(y)} delta with w and its gradient supplied.
  static TargetMetric conformal(int dim, std::function<double(const site::Vec&)> w,
                                std::function<site::Vec(const site::Vec&)> grad_w);
  /// w(y) = amplitude * sum_a sin(y_a + a): periodic on the standard torus.
  static TargetMetric conformal_sine(int dim, double amplitude);

  int dim() const noexcept { return dim_; }
  bool is_constant() const noexcept { return constant_; }
  /// Throws DomainError if the metric is not SPD at y.
  site::Mat metric(const site::Vec& y) const;
  std::array<site::Mat, 3> christoffel(const site::Vec& y) const;

 private:
  int dim_ = 0;
  bool constant_ = true;
  MetricFn metric_;
  ChristoffelFn christoffel_;
};

/// d_i f^a, component a*n + i.
Field<FieldKind::Map> map_differential(const TorusMap& f);

Sym2Field pullback_metric(const TorusMap& f, const TargetMetric& target);

struct EnergyResult {
  ScalarField density;  ///< e(f) = g^{ij} g*_ij
  double total = 0.0;   ///< 1/2 integral of e(f) dV_g
};
EnergyResult energy(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target);

/// tau^a = g^{ij}(d_i d_j f^a - Gamma^k_ij d_k f^a + Gammabar^a_bc d_i f^b d_j f^c)
MapField tension(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target);

struct Theorem1Residual {
  CovectorField residual;  ///< (delta g*)_j + 1/2 d_j e + gbar(tau, f_* d_j)
  double norm = 0.0;
};
Theorem1Residual theorem1_residual(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target);

struct FlowResult {
  TorusMap map;
  std::vector<double> energy;        ///< energy before each step, and after the last
  std::vector<double> tension_norm;  ///< sup norm of tau alongside energy
  int steps = 0;
  bool converged = false;
};

/// Explicit Euler on u <- u + dt tau. dt <= 0 selects min(h)^2 / 4. Throws
/// InstabilityError when a step raises the energy by more than 1e-12 relative.
FlowResult tension_flow(const TorusMap& f0, const GeometryCache& geo, const TargetMetric& target, double dt,
                        int steps, double stop_tol);

struct Corollary1Report {
  double tension_norm = 0.0;   ///< sup norm of tau
  double ihp_residual = 0.0;   ///< defect of the Berger-Ebin gauge field
  double constant = 0.0;       ///< C = mean of e(f) + delta theta
  double deviation = 0.0;      ///< max |e(f) + delta theta - C|
  double energy = 0.0;
  double c_vol = 0.0;          ///< C Vol
  double half_c_vol = 0.0;     ///< 1/2 C Vol
  bool ihp = false;            ///< ihp_residual <= tol
  bool passed = false;
};

/// Throws DomainError if f is not harmonic to tol.
Corollary1Report corollary1_check(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target, double tol,
                                  double cg_tol = 1e-10);

/// All norms are rms so they compare directly with a sup-norm flow tolerance.
struct YorkRelationReport {
  double sampson_norm = 0.0;  ///< ||Delta_S theta||
  double dlambda_norm = 0.0;  ///< ||d lambda||
  double residual = 0.0;      ///< ||Delta_S theta + (n - 2) d lambda||
  bool outside_stated_range = false;
};

/// York decomposition of g* and the relation its parts satisfy when f is harmonic.
YorkRelationReport york_relation(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target,
                                 double cg_tol = 1e-10);

}  // namespace hgauge
