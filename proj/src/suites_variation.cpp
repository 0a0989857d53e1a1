#include <cmath>
#include <random>
#include <string>

#include "harmgauge/decompositions.hpp"
#include "suite_impl.hpp"

namespace hgauge::suites {

namespace {

GeometryCache curved_geometry(const Lattice& lat, std::uint64_t seed) {
  return build_geometry(MetricField::perturbed(lat, lat.dim() == 2 ? 0.15 : 0.05, 2, seed));
}

std::string dim_tag(const Lattice& lat) { return std::to_string(lat.dim()) + "d"; }

double stencil_symbol(int k, double h) { return (8.0 * std::sin(k * h) - std::sin(2.0 * k * h)) / (6.0 * h); }

// Second variation of total scalar curvature at a flat metric along U cos(k.x),
// paired with V cos(k.x): d^2/dt^2 E(delta + t H cos) = -Vol L(H, H; k).
double flat_mode_form(const site::Mat& u, const site::Mat& v, const std::array<double, 3>& k, int n) {
  double kk = 0, uv = 0, tu = 0, tv = 0, ukvk = 0, kuk = 0, kvk = 0;
  for (int a = 0; a < n; ++a) {
    kk += k[a] * k[a];
    tu += u[a][a];
    tv += v[a][a];
  }
  for (int i = 0; i < n; ++i) {
    double ui = 0, vi = 0;
    for (int j = 0; j < n; ++j) {
      uv += u[i][j] * v[i][j];
      ui += u[i][j] * k[j];
      vi += v[i][j] * k[j];
      kuk += k[i] * u[i][j] * k[j];
      kvk += k[i] * v[i][j] * k[j];
    }
    ukvk += ui * vi;
  }
  return 0.25 * kk * uv - 0.5 * ukvk + 0.25 * (kuk * tv + kvk * tu) - 0.25 * kk * tu * tv;
}

// Flat-metric Hessian of total scalar curvature, summed over the Fourier modes of a and b.
double flat_hessian_entry(const Sym2Field& a, const Sym2Field& b, int max_mode) {
  const Lattice& lat = a.lattice();
  const int n = lat.dim();
  double total = 0.0;
  for (const auto& mode : mode_functions(n, max_mode)) {
    const auto phi = evaluate_mode(lat, mode);
    double norm2 = 0.0;
    for (double v : phi) norm2 += v * v;
    site::Mat ua{}, ub{};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double ca = 0.0, cb = 0.0;
        for (std::size_t s = 0; s < phi.size(); ++s) {
          ca += a.sym(i, j, s) * phi[s];
          cb += b.sym(i, j, s) * phi[s];
        }
        ua[i][j] = ua[j][i] = ca / norm2;
        ub[i][j] = ub[j][i] = cb / norm2;
      }
    std::array<double, 3> k{};
    for (int d = 0; d < n; ++d) k[d] = stencil_symbol(mode.k[d], lat.spacing(d));
    total += -2.0 * norm2 * lat.cell_volume() * flat_mode_form(ua, ub, k, n);
  }
  return total;
}

Sym2Field unit_mode(const GeometryCache& geo, int i, int j, int axis, bool sine) {
  Sym2Field h(geo.lattice);
  for (std::size_t s = 0; s < geo.lattice.site_count(); ++s) {
    const double x = geo.lattice.coordinate(s, axis);
    h.sym(i, j, s) = sine ? std::sin(x) : std::cos(x);
  }
  h *= 1.0 / l2_norm(h, geo);
  return h;
}

void compare_with_oracle(const std::string& tag, const GeometryCache& geo, const std::vector<Sym2Field>& basis,
                         SuiteResult& r) {
  const auto rep = hessian_on_slice(geo, basis);
  const int m = rep.basis_size;
  DenseMatrix oracle(m);
  double scale = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      oracle(i, j) = flat_hessian_entry(basis[i], basis[j], 1);
      scale = std::max(scale, std::abs(oracle(i, j)));
    }
  const auto ev = jacobi_eigensolve(oracle).values;
  double worst = 0.0;
  for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(rep.fd_eigenvalues[i] - ev[i]));
  r.checks.push_back(check_at_most(tag + ".spectrum_vs_oracle",
                                   "finite-difference Hessian spectrum matches the Fourier-mode oracle (scaled by "
                                   "max(1, largest oracle entry))",
                                   worst / std::max(1.0, scale), 1e-5));
}

std::vector<Sym2Field> curved_slice(const GeometryCache& geo, int count, std::uint64_t seed, double cg_tol) {
  std::vector<Sym2Field> out{geo.metric};
  out[0] *= 1.0 / l2_norm(geo.metric, geo);
  for (int c = 0; c < count; ++c) {
    Sym2Field v = chen(random_band_limited<FieldKind::Sym2>(geo.lattice, 1, seed + c), geo, cg_tol).harmonic;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : out) v.add_scaled(-l2_inner(b, v, geo), b);
    v *= 1.0 / l2_norm(v, geo);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

void gauss_bonnet(const SuiteOptions& o, SuiteResult& r) {
  const Lattice base = grid_or(o, {32, 32});
  require(base.dim() == 2, "gauss-bonnet suite runs on surfaces");
  const int mm = o.max_mode.value_or(2);
  for (int k = 0; k < 3; ++k) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(k);
    double e[2] = {};
    for (int level = 0; level < 2; ++level) {
      const Lattice lat = level ? refined(base) : base;
      auto u = random_band_limited<FieldKind::Scalar>(lat, mm, 7 * seed + 5);
      u *= 0.3 / u.max_abs();
      e[level] = std::abs(eh_functional(build_geometry(MetricField::conformal(u))));
    }
    const std::string tag = "conformal.seed" + std::to_string(seed);
    r.checks.push_back(check_at_most(tag + ".total_scalar_curvature",
                                     "total scalar curvature of a conformally flat torus vanishes", e[1], 1e-5));
    if (e[0] <= 1e-12 && e[1] <= 1e-12)
      r.checks.push_back(check_at_most(tag + ".rounding_floor",
                                       "total scalar curvature sits at the rounding floor, so no decay order is measured",
                                       std::max(e[0], e[1]), 1e-12));
    else
      r.checks.push_back(check_at_least(tag + ".order", "total scalar curvature decays at fourth order",
                                        refinement_order(e[0], e[1]), 3.5));
  }
}

void first_variation(const SuiteOptions& o, SuiteResult& r) {
  const char* label = "extrapolated derivative of total scalar curvature equals minus the Einstein pairing";
  std::vector<Lattice> lats;
  if (o.grid) lats.emplace_back(*o.grid);
  else lats = {Lattice({48, 48}), Lattice({24, 24, 24})};
  for (const Lattice& lat : lats) {
    const auto geo = curved_geometry(lat, o.seed + 4000);
    const auto generic = random_band_limited<FieldKind::Sym2>(lat, o.max_mode.value_or(2), o.seed + 7);
    const auto slice = chen(generic, geo, o.cg_tol).harmonic;
    for (const auto& [name, h] : {std::pair{"generic", &generic}, std::pair{"slice", &slice}}) {
      const auto rep = hgauge::first_variation(geo, *h);
      r.checks.push_back(check_at_most(std::string(name) + "." + dim_tag(lat) + ".error", label,
                                       std::abs(rep.analytic - rep.fd), std::max(1e-6 * std::abs(rep.analytic), 1e-9)));
    }
  }
  const auto geo = curved_geometry(Lattice({12, 12, 12}), o.seed + 4000);
  const double e = eh_functional(geo);
  const double c = 1.1;
  const double ec = eh_functional(build_geometry(MetricField(c * geo.metric)));
  r.checks.push_back(check_at_least("scaling.3d.nonzero", "total scalar curvature of the test metric is nonzero",
                                    std::abs(e), 1e-6));
  r.checks.push_back(check_at_most("scaling.3d", "total scalar curvature scales as c^(n/2-1), relative",
                                   std::abs(ec - std::sqrt(c) * e) / std::abs(std::sqrt(c) * e), 1e-10));
}

void theorem4(const SuiteOptions& o, SuiteResult& r) {
  const char* label = "Einstein and Ricci pairings differ by half the integral of Scal tr h, relative";
  for (const Lattice& lat : {Lattice({32, 32}), Lattice({16, 16, 16})}) {
    const auto geo = curved_geometry(lat, o.seed + 5000);
    const auto h = random_band_limited<FieldKind::Sym2>(lat, o.max_mode.value_or(2), o.seed + 9);
    for (const auto& [name, dir] : {std::pair{"generic", &h}, std::pair{"metric", &geo.metric}}) {
      const auto rep = hgauge::first_variation(geo, *dir);
      const double scale = std::abs(rep.gap_direct);
      r.checks.push_back(check_at_most(std::string(name) + "." + dim_tag(lat) + ".gap", label,
                                       scale > 0 ? std::abs(rep.theorem4_gap - rep.gap_direct) / scale
                                                 : std::abs(rep.theorem4_gap),
                                       1e-10));
    }
    const auto flat = build_geometry(MetricField::flat(lat));
    const auto rep = hgauge::first_variation(flat, h);
    r.checks.push_back(check_at_most("flat." + dim_tag(lat) + ".gap", "Einstein and Ricci pairings agree on a flat torus",
                                     std::abs(rep.theorem4_gap), 1e-10));
  }
}

void hessian(const SuiteOptions& o, SuiteResult& r) {
  {
    const auto geo = build_geometry(MetricField::flat(Lattice({32, 32})));
    compare_with_oracle("flat.2d", geo, hg_basis(geo, 1, 1e-10), r);
  }
  {
    const auto geo = build_geometry(MetricField::flat(Lattice({12, 12, 12})));
    std::vector<Sym2Field> basis{geo.metric * (1.0 / l2_norm(geo.metric, geo)), unit_mode(geo, 1, 2, 0, false),
                                 unit_mode(geo, 0, 2, 1, true), unit_mode(geo, 0, 0, 2, false),
                                 unit_mode(geo, 0, 1, 2, true)};
    compare_with_oracle("flat.3d", geo, basis, r);
  }
  const auto geo = curved_geometry(Lattice({12, 12, 12}), o.seed + 6000);
  const auto basis = curved_slice(geo, 4, o.seed + 100, std::min(o.cg_tol, 1e-11));
  const auto rep = hessian_on_slice(geo, basis);
  r.checks.push_back(check_at_most("curved.3d.fd_symmetry", "finite-difference Hessian is symmetric before symmetrization",
                                   rep.fd_symmetry_defect, 1e-8));
  r.checks.push_back(check_at_most("curved.3d.op_symmetry", "operator Hessian is symmetric before symmetrization",
                                   rep.op_symmetry_defect, 1e-8));
  r.checks.push_back(check_at_most("curved.3d.metric_rayleigh",
                                   "Rayleigh quotient of the metric direction matches the scaling-law second "
                                   "derivative, relative",
                                   std::abs(rep.metric_rayleigh_fd - rep.scaling_second_derivative) /
                                       std::abs(rep.scaling_second_derivative),
                                   1e-6));

  const int m = rep.basis_size;
  DenseMatrix a(m);
  std::mt19937_64 rng(o.seed + 9);
  std::normal_distribution<double> normal;
  for (double& v : a.a) v = normal(rng);
  const DenseMatrix q = jacobi_eigensolve(multiply(a, transpose(a))).vectors;
  std::vector<Sym2Field> mixed;
  for (int i = 0; i < m; ++i) {
    Sym2Field v(geo.lattice);
    for (int j = 0; j < m; ++j) v.add_scaled(q(j, i), basis[j]);
    mixed.push_back(std::move(v));
  }
  const auto rep2 = hessian_on_slice(geo, mixed, rep.t);
  double scale = 0.0, worst = 0.0;
  for (double v : rep.fd_eigenvalues) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(rep2.fd_eigenvalues[i] - rep.fd_eigenvalues[i]));
  r.checks.push_back(check_at_most("curved.3d.remix", "spectrum is invariant under orthogonal re-mixing of the basis, "
                                                      "relative to the largest eigenvalue",
                                   worst / scale, 1e-8));
}

void curv2k(const SuiteOptions& o, SuiteResult& r) {
  const double kappa = o.kappa;
  for (int n = 2; n <= 3; ++n) {
    site::Mat id{}, skew{};
    for (int a = 0; a < n; ++a) id[a][a] = 1.0;
    skew = id;
    skew[0][0] = 2.0;
    skew[0][1] = skew[1][0] = 0.3;
    if (n == 3) skew[1][2] = skew[2][1] = -0.2, skew[2][2] = 0.8;
    for (const auto& [name, g] : {std::pair{"identity", id}, std::pair{"skewed", skew}}) {
      const auto eig = curv2k_eigen(constant_curvature(n, kappa, g));
      double tf = 0.0;
      for (double v : eig.trace_free) tf = std::max(tf, std::abs(v - kappa));
      const std::string tag = std::to_string(n) + "d." + name;
      r.checks.push_back(check_at_most(tag + ".trace_free", "trace-free eigenvalues of constant curvature equal kappa",
                                       tf, 1e-12));
      r.checks.push_back(check_at_most(tag + ".pure_trace",
                                       "pure-trace eigenvalue of constant curvature equals (n-1) kappa",
                                       std::abs(eig.pure_trace - (n - 1) * kappa), 1e-12));
    }
  }
}

}  // namespace hgauge::suites
