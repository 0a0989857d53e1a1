#include <cmath>
#include <random>

#include "doctest.h"
#include "harmgauge/eh_variation.hpp"
#include "support.hpp"

using namespace hgauge;
using namespace hgtest;
using hgauge::site::Mat;

namespace {

double symbol(int k, double h) { return (8.0 * std::sin(k * h) - std::sin(2.0 * k * h)) / (6.0 * h); }
double refinement_order(double coarse, double fine, double ratio = 2.0) {
  return std::log(coarse / fine) / std::log(ratio);
}

GeometryCache flat(int n, int dim) { return build_geometry(MetricField::flat(Lattice(std::vector<int>(dim, n)))); }
GeometryCache curved(int n, int dim, std::uint64_t seed = 41) {
  return build_geometry(MetricField::perturbed(Lattice(std::vector<int>(dim, n)), dim == 2 ? 0.15 : 0.05, 2, seed));
}
GeometryCache conformal2(int n) {
  const Lattice lat({n, n});
  return build_geometry(MetricField::conformal(
      scalar_from(lat, [](const Point& p) { return 0.3 * std::sin(p[0]) * std::cos(2.0 * p[1]) + 0.1 * std::cos(p[1]); })));
}

}  // namespace

TEST_CASE("total scalar curvature") {
  CHECK(eh_functional(flat(8, 3)) == 0.0);
  CHECK(std::abs(eh_functional(conformal2(32))) < 1e-12);

  const auto geo = curved(12, 3);
  const double e = eh_functional(geo);
  REQUIRE(std::abs(e) > 1e-2);
  for (double c : {0.5, 2.0, 3.7}) {
    Sym2Field g = geo.metric;
    g *= c;
    CHECK(eh_functional(build_geometry(MetricField(g))) == doctest::Approx(std::sqrt(c) * e).epsilon(1e-10));
    CHECK(eh_functional(build_geometry(MetricField::scaled_flat(geo.lattice, c))) == 0.0);
  }
}

TEST_CASE("Einstein tensor") {
  CHECK(einstein_tensor(flat(8, 2)).max_abs() == 0.0);
  const auto g2 = curved(24, 2);
  CHECK(trace(einstein_tensor(g2), g2).max_abs() < 1e-12);

  std::vector<double> bianchi;
  for (int n : {12, 24}) {
    const auto geo = curved(n, 3);
    bianchi.push_back(l2_norm(divergence(einstein_tensor(geo), geo, OperatorMode::Analytic), geo));
  }
  CHECK(refinement_order(bianchi[0], bianchi[1]) >= 3.0);
}

TEST_CASE("first variation on a flat torus vanishes") {
  const auto geo = flat(16, 2);
  const auto h = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 5);
  const auto rep = first_variation(geo, h);
  CHECK(rep.analytic == 0.0);
  CHECK(std::abs(rep.fd) <= 1e-10);
  CHECK(rep.theorem4_gap == 0.0);
  CHECK(rep.gap_direct == 0.0);
}

TEST_CASE("first variation along the metric follows the scaling law") {
  const auto geo = curved(12, 3);
  const auto rep = first_variation(geo, geo.metric);
  const double e = eh_functional(geo);
  // d/dc of c^{n/2-1} E at c = 1
  CHECK(rep.analytic == doctest::Approx(0.5 * e).epsilon(1e-12));
  CHECK(rep.fd == doctest::Approx(0.5 * e).epsilon(1e-8));
  CHECK(rep.theorem4_gap == doctest::Approx(rep.gap_direct).epsilon(1e-10));
  CHECK(rep.theorem4_gap == doctest::Approx(1.5 * e).epsilon(1e-10));
}

TEST_CASE("first variation matches the Einstein pairing to stencil order") {
  std::vector<double> rel;
  for (int n : {12, 16, 24}) {
    const auto geo = curved(n, 3);
    const auto h = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 7);
    const auto rep = first_variation(geo, h);
    CHECK(rep.theorem4_gap == doctest::Approx(rep.gap_direct).epsilon(1e-10));
    CHECK(rep.fd_error < 1e-4 * std::abs(rep.fd));
    rel.push_back(std::abs(rep.analytic - rep.fd) / std::abs(rep.analytic));
  }
  CHECK(rel[2] < 2e-4);
  CHECK(refinement_order(rel[0], rel[2], 2.0) > 3.5);
}

TEST_CASE("first variation rejects a step that leaves the metric cone") {
  const auto geo = flat(8, 2);
  Sym2Field h(geo.lattice);
  for (double& v : h.component(0)) v = -1.0;
  CHECK_THROWS_AS(first_variation(geo, h, 20.0), DomainError);
  CHECK_NOTHROW(first_variation(geo, h, 0.5));
}

TEST_CASE("slice membership") {
  const auto fl = flat(16, 3);
  CHECK(chen_membership(fl.metric, fl) == 0.0);
  Sym2Field tt(fl.lattice);
  for (double& v : tt.component(sym_slot(0, 1, 3))) v = 1.0;
  CHECK(chen_membership(tt, fl) == 0.0);

  // nabla g vanishes identically on the lattice, so g lies in the slice to rounding.
  const auto geo3 = curved(12, 3);
  CHECK(chen_membership(geo3.metric, geo3) < 1e-13);

  // h = lambda g with lambda = sin x: alpha* h = (n/2 - 1) d lambda
  for (int dim : {2, 3}) {
    const auto geo = flat(32, dim);
    const ScalarField lambda = scalar_from(geo.lattice, [](const Point& p) { return std::sin(p[0]); });
    const double m = chen_membership(times_metric(lambda, geo), geo);
    CAPTURE(dim);
    // ||d lambda|| / ||lambda g|| = 1 / sqrt(n) in the continuum
    const double expected = (dim / 2.0 - 1.0) / std::sqrt(dim);
    CHECK(m == doctest::Approx(expected).epsilon(1e-4));
    if (dim == 2) CHECK(m < 1e-4);
  }
}

TEST_CASE("identity map stays harmonic to first order along slice directions") {
  const std::vector<double> ts{4e-2, 2e-2, 1e-2, 5e-3};
  std::vector<double> slice_rate, identity;
  for (int n : {32, 48}) {
    const auto geo = curved(n, 2);
    const auto generic = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 11);
    const auto slice = chen(generic, geo, 1e-11).harmonic;
    const auto on = chen_membership_ladder(slice, geo, ts);
    const auto off = chen_membership_ladder(generic, geo, ts);

    // tau = -t alpha*(h) + O(t^2)
    const double alpha_norm = l2_norm(alpha_star_apply(generic, geo), geo);
    CHECK(off.rungs.back().tension / ts.back() == doctest::Approx(alpha_norm).epsilon(1e-2));
    CHECK(off.tension_order == doctest::Approx(1.0).epsilon(0.02));
    slice_rate.push_back(on.rungs.back().tension / off.rungs.back().tension);
    identity.push_back(on.rungs.front().identity);
  }
  // The first-order tension along the slice is the stencil defect of alpha*
  CHECK(slice_rate[1] < 1e-3);
  CHECK(refinement_order(slice_rate[0], slice_rate[1], 1.5) > 3.5);
  CHECK(identity[1] < 1e-4);
  CHECK(refinement_order(identity[0], identity[1], 1.5) > 3.5);
}

namespace {

// Symmetric bilinear form whose value on a single cosine mode H cos(k.x) gives the
// second variation of total scalar curvature at the flat metric:
// d^2/dt^2 E(delta + t H cos) = -Vol * L(H, H; kt) with kt the stencil symbol.
double quadratic_symbol(const Mat& u, const Mat& v, const std::array<double, 3>& kt, int n) {
  double kk = 0, uv = 0, tu = 0, tv = 0, uk_vk = 0, kuk = 0, kvk = 0;
  for (int a = 0; a < n; ++a) {
    kk += kt[a] * kt[a];
    tu += u[a][a];
    tv += v[a][a];
  }
  for (int i = 0; i < n; ++i) {
    double ui = 0, vi = 0;
    for (int j = 0; j < n; ++j) {
      uv += u[i][j] * v[i][j];
      ui += u[i][j] * kt[j];
      vi += v[i][j] * kt[j];
      kuk += kt[i] * u[i][j] * kt[j];
      kvk += kt[i] * v[i][j] * kt[j];
    }
    uk_vk += ui * vi;
  }
  return 0.25 * kk * uv - 0.5 * uk_vk + 0.25 * (kuk * tv + kvk * tu) - 0.25 * kk * tu * tv;
}

// Flat-metric Hessian of total scalar curvature between band-limited fields,
// assembled mode by mode from discrete Fourier coefficients.
double flat_hessian_oracle(const Sym2Field& a, const Sym2Field& b, int max_mode) {
  const Lattice& lat = a.lattice();
  const int n = lat.dim();
  double total = 0.0;
  for (const auto& mode : mode_functions(n, max_mode)) {
    const auto phi = evaluate_mode(lat, mode);
    double norm2 = 0.0;
    for (double v : phi) norm2 += v * v;
    Mat ua{}, ub{};
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
    std::array<double, 3> kt{};
    for (int d = 0; d < n; ++d) kt[d] = symbol(mode.k[d], lat.spacing(d));
    // integral of phi^2 is norm2 times the cell volume
    total += -2.0 * norm2 * lat.cell_volume() * quadratic_symbol(ua, ub, kt, n);
  }
  return total;
}

// Gram-Schmidt in the L2 product of geo; g first.
std::vector<Sym2Field> orthonormal_slice(const GeometryCache& geo, int count, std::uint64_t seed) {
  std::vector<Sym2Field> out{geo.metric};
  out[0] *= 1.0 / l2_norm(geo.metric, geo);
  for (int c = 0; c < count; ++c) {
    Sym2Field v = chen(random_band_limited<FieldKind::Sym2>(geo.lattice, 1, seed + c), geo, 1e-11).harmonic;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : out) v.add_scaled(-l2_inner(b, v, geo), b);
    v *= 1.0 / l2_norm(v, geo);
    out.push_back(std::move(v));
  }
  return out;
}

Sym2Field unit_mode(const GeometryCache& geo, int i, int j, const std::function<double(const Point&)>& fn) {
  Sym2Field h(geo.lattice);
  const auto f = scalar_from(geo.lattice, fn);
  std::copy(f.component(0).begin(), f.component(0).end(), h.component(sym_slot(i, j, geo.dim())).begin());
  h *= 1.0 / l2_norm(h, geo);
  return h;
}

}  // namespace

TEST_CASE("second-variation operator on a flat torus") {
  const auto geo = flat(32, 2);
  const auto h = unit_mode(geo, 0, 0, [](const Point& p) { return std::sin(p[0]); });
  const Sym2Field lh = lh_apply(h, geo);
  const double kt = symbol(1, geo.lattice.spacing(0));
  CHECK(max_abs_diff(lh.data(), (-kt * kt * h).data()) < 1e-14);
  CHECK(max_abs_diff(lh.data(), (-1.0 * h).data()) < 2.0 * std::pow(geo.lattice.spacing(0), 4) * h.max_abs());

  Sym2Field c(geo.lattice);
  for (int slot = 0; slot < 3; ++slot)
    for (double& v : c.component(slot)) v = 0.3 + slot;
  CHECK(lh_apply(c, geo).max_abs() == 0.0);

  // principal symbol: <L_H b, b> / (-|k|^2) = kt^2 / k^2 for single modes
  for (int k : {1, 2, 4}) {
    const auto b = unit_mode(geo, 0, 1, [k](const Point& p) { return std::sin(k * p[0]); });
    const double ratio = l2_inner(lh_apply(b, geo), b, geo) / (-1.0 * k * k);
    const double ktk = symbol(k, geo.lattice.spacing(0));
    CHECK(ratio == doctest::Approx(ktk * ktk / (k * k)).epsilon(1e-12));
    CHECK(ratio == doctest::Approx(1.0).epsilon(std::pow(k * geo.lattice.spacing(0), 4)));
  }
}

TEST_CASE("second-variation operator is self-adjoint on a curved torus") {
  const auto geo = curved(12, 3);
  const auto a = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 3);
  const auto b = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 4);
  const double ab = l2_inner(lh_apply(a, geo), b, geo), ba = l2_inner(a, lh_apply(b, geo), geo);
  CHECK(std::abs(ab - ba) <= 1e-8 * std::abs(ab));
}

TEST_CASE("flat-torus Hessian matches the Fourier oracle") {
  SUBCASE("surface slice basis") {
    const auto geo = flat(32, 2);
    const auto basis = hg_basis(geo, 1, 1e-10);
    const auto rep = hessian_on_slice(geo, basis);
    CHECK(rep.basis_size == 11);
    // The second variation vanishes identically on flat surfaces.
    for (int i = 0; i < rep.basis_size; ++i)
      for (int j = 0; j < rep.basis_size; ++j) CHECK(std::abs(flat_hessian_oracle(basis[i], basis[j], 1)) < 1e-14);
    for (double v : rep.fd_eigenvalues) CHECK(std::abs(v) <= 1e-5);
    CHECK(rep.fd_symmetry_defect <= 1e-8);
  }
  SUBCASE("three-torus modes") {
    const auto geo = flat(12, 3);
    std::vector<Sym2Field> basis{geo.metric * (1.0 / l2_norm(geo.metric, geo)),
                                 unit_mode(geo, 1, 2, [](const Point& p) { return std::cos(p[0]); }),
                                 unit_mode(geo, 0, 2, [](const Point& p) { return std::sin(p[1]); }),
                                 unit_mode(geo, 0, 0, [](const Point& p) { return std::cos(p[1] - p[2]); }),
                                 unit_mode(geo, 0, 1, [](const Point& p) { return std::cos(p[0] + p[1]); })};
    const auto rep = hessian_on_slice(geo, basis);
    const int m = rep.basis_size;
    DenseMatrix oracle(m);
    double scale = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        oracle(i, j) = flat_hessian_oracle(basis[i], basis[j], 1);
        scale = std::max(scale, std::abs(oracle(i, j)));
      }
    REQUIRE(scale > 0.1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) CHECK(std::abs(rep.fd_matrix(i, j) - oracle(i, j)) <= 1e-5 * scale);
    const auto ev = jacobi_eigensolve(oracle).values;
    for (int i = 0; i < m; ++i) CHECK(rep.fd_eigenvalues[i] == doctest::Approx(ev[i]).epsilon(1e-5).scale(scale));
  }
}

TEST_CASE("curved-torus Hessian diagnostics") {
  const auto geo = curved(12, 3);
  const auto basis = orthonormal_slice(geo, 4, 100);
  const auto rep = hessian_on_slice(geo, basis);
  CHECK(rep.fd_symmetry_defect <= 1e-8);
  CHECK(rep.op_symmetry_defect <= 1e-8);
  REQUIRE(std::abs(eh_functional(geo)) > 1e-2);
  CHECK(rep.metric_rayleigh_fd == doctest::Approx(rep.scaling_second_derivative).epsilon(1e-6));
  REQUIRE(rep.complement_min_fd.has_value());
  MESSAGE("FD vs operator discrepancy " << rep.discrepancy << ", complement min " << *rep.complement_min_fd);

  // orthogonal re-mixing leaves the spectrum unchanged
  const int m = rep.basis_size;
  DenseMatrix q(m);
  {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    DenseMatrix a(m);
    for (double& v : a.a) v = normal(rng);
    q = jacobi_eigensolve(multiply(a, transpose(a))).vectors;
  }
  std::vector<Sym2Field> mixed;
  for (int i = 0; i < m; ++i) {
    Sym2Field v(geo.lattice);
    for (int j = 0; j < m; ++j) v.add_scaled(q(j, i), basis[j]);
    mixed.push_back(std::move(v));
  }
  const auto rep2 = hessian_on_slice(geo, mixed, rep.t);
  double scale = 0.0;
  for (double v : rep.fd_eigenvalues) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < m; ++i) CHECK(std::abs(rep2.fd_eigenvalues[i] - rep.fd_eigenvalues[i]) <= 1e-8 * scale);
}

namespace {

Mat skewed_metric() {
  Mat g{};
  g[0][0] = 2.0, g[1][1] = 1.5, g[2][2] = 0.8;
  g[0][1] = g[1][0] = 0.3;
  g[1][2] = g[2][1] = -0.2;
  return g;
}

// Identity metric with R_abab = k[pair] for the three coordinate planes (01, 02, 12).
CurvaturePoint plane_curvatures(const std::array<double, 3>& k) {
  CurvaturePoint p{.n = 3};
  for (int a = 0; a < 3; ++a) p.g[a][a] = 1.0;
  const int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int q = 0; q < 3; ++q) {
    const int a = planes[q][0], b = planes[q][1];
    auto at = [&](int i, int j, int l, int m) -> double& { return p.r[((i * 3 + j) * 3 + l) * 3 + m]; };
    at(a, b, a, b) = at(b, a, b, a) = k[q];
    at(a, b, b, a) = at(b, a, a, b) = -k[q];
  }
  return p;
}

}  // namespace

TEST_CASE("curvature operator of the second kind on model curvature") {
  const auto flat_spec = curv2k_spectrum(flat(8, 3));
  CHECK(flat_spec.min_trace_free == 0.0);
  CHECK_FALSE(flat_spec.positive);
  for (double v : flat_spec.sites.front().full) CHECK(v == 0.0);

  // With R_{ikjl} = kappa (g_ij g_kl - g_il g_kj), R(h) = kappa (tr h g - h).
  for (int n : {2, 3}) {
    for (const Mat& g : {Mat{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, skewed_metric()}) {
      const double kappa = 0.7;
      const auto e = curv2k_eigen(constant_curvature(n, kappa, g));
      CAPTURE(n);
      CHECK(e.pure_trace == doctest::Approx((n - 1) * kappa).epsilon(1e-12));
      REQUIRE(e.trace_free.size() == static_cast<std::size_t>(n * (n + 1) / 2 - 1));
      for (double v : e.trace_free) CHECK(v == doctest::Approx(-kappa).epsilon(1e-12));
      CHECK(e.full.back() == doctest::Approx((n - 1) * kappa).epsilon(1e-12));
    }
  }
}

TEST_CASE("curvature operator on a curved surface") {
  const auto geo = curved(16, 2);
  const auto spec = curv2k_spectrum(geo);
  double worst = 0.0;
  for (std::size_t s = 0; s < geo.lattice.site_count(); ++s) {
    const double k = 0.5 * geo.scal.at(0, s);
    worst = std::max({worst, std::abs(spec.sites[s].trace_free[0] - -k), std::abs(spec.sites[s].trace_free[1] - -k),
                      std::abs(spec.sites[s].pure_trace - k)});
  }
  CHECK(worst < 1e-12);
  const auto one = curv2k_spectrum(geo, std::size_t{5});
  REQUIRE(one.sites.size() == 1);
  CHECK(one.sites[0].full == spec.sites[5].full);
}

TEST_CASE("mixed-sign model curvature and axis permutations") {
  const auto mixed = curv2k_spectrum({plane_curvatures({1.0, -2.0, 0.5})});
  CHECK(mixed.min_trace_free < 0.0);
  CHECK_FALSE(mixed.positive);

  const auto base = curv2k_eigen(plane_curvatures({0.3, 1.1, -0.4}));
  // permuting axes permutes the coordinate planes
  for (const auto& k : {std::array<double, 3>{0.3, -0.4, 1.1}, std::array<double, 3>{1.1, 0.3, -0.4},
                        std::array<double, 3>{-0.4, 1.1, 0.3}}) {
    const auto e = curv2k_eigen(plane_curvatures(k));
    for (std::size_t i = 0; i < base.full.size(); ++i) CHECK(std::abs(e.full[i] - base.full[i]) <= 1e-12);
    for (std::size_t i = 0; i < base.trace_free.size(); ++i)
      CHECK(std::abs(e.trace_free[i] - base.trace_free[i]) <= 1e-12);
  }
}

TEST_CASE("rigidity probe") {
  const auto geo = flat(16, 2);
  Sym2Field tf(geo.lattice);
  for (double& v : tf.component(sym_slot(0, 1, 2))) v = 1.0;
  const auto rep = theorem6_probe(geo, {geo.metric, tf, random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 3)}, 1e-10);
  CHECK(rep.nonnegative_curvature);
  CHECK(rep.consistent);
  REQUIRE(rep.candidates.size() == 3);

  const auto& g = rep.candidates[0];
  CHECK(g.admissible);
  CHECK(g.parallel_defect == 0.0);
  CHECK(g.proportional_defect < 1e-15);
  CHECK(g.proportional);

  // parallel but not proportional: reported, not failed
  const auto& c = rep.candidates[1];
  CHECK(c.admissible);
  CHECK(c.parallel);
  CHECK(c.curvature_vanishes);
  CHECK_FALSE(c.proportional);
  CHECK(c.proportional_defect == doctest::Approx(1.0));

  CHECK_FALSE(rep.candidates[2].admissible);

  // a trace-free candidate on positive model curvature pairs to -kappa |h|^2
  const double kappa = 0.4;
  const Mat gm = skewed_metric();
  const auto p = constant_curvature(3, kappa, gm);
  Mat h{};  // trace-free with respect to gm: h = e_01 + e_10 - (2 g^01 / tr_g g) g
  h[0][1] = h[1][0] = 1.0;
  const Mat gi = site::inverse(gm, 3);
  const double tr = 2.0 * gi[0][1];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h[i][j] -= tr / 3.0 * gm[i][j];
  const double hh = site::pair_sym(gi, h, h, 3);
  CHECK(curvature_pairing(p, h) == doctest::Approx(-kappa * hh).epsilon(1e-12));
  CHECK(std::abs(curvature_pairing(p, h)) > 1e-3);
}
