#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "harmgauge/lattice.hpp"

namespace hgauge {

/// Pointwise symmetric positive definite Sym2 field, validated at construction.
class MetricField {
 public:
  /// Throws DomainError naming the first non-SPD site.
  explicit MetricField(Sym2Field g);

  static MetricField flat(const Lattice& lattice);
  static MetricField scaled_flat(const Lattice& lattice, double c);
  /// e^{2u} times the identity.
  static MetricField conformal(const ScalarField& u);
  /// identity + amplitude * random band-limited perturbation.
  static MetricField perturbed(const Lattice& lattice, double amplitude, int max_mode, std::uint64_t seed);

  const Sym2Field& tensor() const noexcept { return g_; }
  const Lattice& lattice() const noexcept { return g_.lattice(); }
  int dim() const noexcept { return g_.lattice().dim(); }

  /// True when every site holds the same matrix (Christoffels vanish identically).
  bool is_constant() const;

 private:
  Sym2Field g_;
};

/// All curvature data of a metric. The Riemann convention is R_{abab} = sectional
/// curvature: a metric of constant curvature k has R_{ikjl} = k (g_ij g_kl - g_il g_kj),
/// Ric_ij = g^{kl} R_{kilj} and Scal = g^{ij} Ric_ij.
struct GeometryCache {
  Lattice lattice;
  Sym2Field metric;
  Sym2Field inverse;
  ScalarField density;       ///< sqrt(det g)
  Sym2GradField christoffel; ///< Gamma^k_{ij}, component k*nsym + slot(i,j)
  Rank4Field riemann;        ///< R_{abcd}, projected onto the pair (anti)symmetries
  Sym2Field ricci;
  ScalarField scal;
  bool constant_metric = false;

  /// Raw (pre-projection) defects: max |R_abcd + R_bacd| and max |R_abcd - R_cdab|.
  double raw_antisymmetry_defect = 0.0;
  double raw_pair_defect = 0.0;

  /// Gamma^k_ij + (1/n) g_ij c^k, with the O(h^4) vector c^k chosen so that
  /// w g^{ij} Gamma~^k_ij = -d_i(w g^{ik}) holds on the lattice. The Killing
  /// operator uses it so that its transpose annihilates g exactly.
  Sym2GradField killing_christoffel;

  int dim() const noexcept { return lattice.dim(); }
  double gamma(int k, int i, int j, std::size_t s) const {
    const int n = lattice.dim();
    return christoffel.at(k * sym_count(n) + sym_slot(i, j, n), s);
  }
  double killing_gamma(int k, int i, int j, std::size_t s) const {
    const int n = lattice.dim();
    return killing_christoffel.at(k * sym_count(n) + sym_slot(i, j, n), s);
  }
  double riem(int a, int b, int c, int d, std::size_t s) const {
    const int n = lattice.dim();
    return riemann.at(((a * n + b) * n + c) * n + d, s);
  }
};

GeometryCache build_geometry(const MetricField& g);

/// (nabla theta)_{ij} = d_i theta_j - Gamma^k_ij theta_k
Cov2Field covariant_derivative(const CovectorField& theta, const GeometryCache& geo);
/// (nabla h)_{kij} = d_k h_ij - Gamma^l_ki h_lj - Gamma^l_kj h_il
Sym2GradField covariant_derivative(const Sym2Field& h, const GeometryCache& geo);
/// (nabla T)_{lkij} for T symmetric in its last pair.
Rank4Field covariant_derivative(const Sym2GradField& t, const GeometryCache& geo);

/// Metric-weighted L2 products: integral of the pointwise g-pairing against sqrt(det g).
double l2_inner(const ScalarField& a, const ScalarField& b, const GeometryCache& geo);
double l2_inner(const CovectorField& a, const CovectorField& b, const GeometryCache& geo);
double l2_inner(const VectorField& a, const VectorField& b, const GeometryCache& geo);
double l2_inner(const Sym2Field& a, const Sym2Field& b, const GeometryCache& geo);
double l2_inner(const Cov2Field& a, const Cov2Field& b, const GeometryCache& geo);
double l2_inner(const Sym2GradField& a, const Sym2GradField& b, const GeometryCache& geo);
double l2_inner(const Sym2Field& a, const Sym2Field& b, const MetricField& g);
double l2_inner(const CovectorField& a, const CovectorField& b, const MetricField& g);

template <FieldKind K>
double l2_norm(const Field<K>& a, const GeometryCache& geo) {
  const double v = l2_inner(a, a, geo);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

/// l2_norm divided by sqrt(Vol): comparable with pointwise bounds.
template <FieldKind K>
double rms_norm(const Field<K>& a, const GeometryCache& geo) {
  return l2_norm(a, geo) / std::sqrt(integrate(geo.density));
}

/// Index raising/lowering with the metric.
VectorField raise(const CovectorField& theta, const GeometryCache& geo);
CovectorField lower(const VectorField& xi, const GeometryCache& geo);

}  // namespace hgauge
