#include <cmath>

#include "doctest.h"
#include "harmgauge/decompositions.hpp"
#include "support.hpp"

using namespace hgauge;
using namespace hgtest;

namespace {

constexpr double kTol = 1e-10;

double symbol(int k, double h) { return (8.0 * std::sin(k * h) - std::sin(2.0 * k * h)) / (6.0 * h); }

// Rank of a small dense row-major matrix by elimination with a relative pivot floor.
int rank_of(std::vector<std::vector<double>> m) {
  const int rows = static_cast<int>(m.size()), cols = rows ? static_cast<int>(m[0].size()) : 0;
  double scale = 0.0;
  for (const auto& r : m)
    for (double v : r) scale = std::max(scale, std::abs(v));
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = rank;
    for (int r = rank + 1; r < rows; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (std::abs(m[piv][c]) <= 1e-12 * scale) continue;
    std::swap(m[piv], m[rank]);
    for (int r = rank + 1; r < rows; ++r) {
      const double f = m[r][c] / m[rank][c];
      for (int k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

// Dimension of the discrete kernel of alpha* restricted to real modes up to max_mode on
// the flat unit-metric torus with equal spacings h. Row j of the symbol (divided by i):
// -sum_i kt_i h_ij + 1/2 kt_j tr h.
int flat_slice_dimension(int dim, int max_mode, double h) {
  const int nsym = sym_count(dim);
  int total = 0;
  for (const auto& mode : mode_functions(dim, max_mode)) {
    std::array<double, 3> kt{};
    bool zero = true;
    for (int a = 0; a < dim; ++a) {
      kt[a] = symbol(mode.k[a], h);
      zero = zero && mode.k[a] == 0;
    }
    if (zero) {
      total += nsym;
      continue;
    }
    std::vector<std::vector<double>> m(dim, std::vector<double>(nsym, 0.0));
    for (int j = 0; j < dim; ++j)
      for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) {
          const int slot = sym_slot(a, b, dim);
          double v = 0.0;
          if (b == j) v -= kt[a];
          if (a == j && a != b) v -= kt[b];
          if (a == b) v += 0.5 * kt[j];
          m[j][slot] = v;
        }
    total += nsym - rank_of(m);
  }
  return total;
}

CovectorField zero_mean(CovectorField t) {
  for (int c = 0; c < t.components(); ++c) {
    double mean = 0.0;
    for (double v : t.component(c)) mean += v;
    mean /= static_cast<double>(t.sites());
    for (double& v : t.component(c)) v -= mean;
  }
  return t;
}

double rel_inner(const Sym2Field& a, const Sym2Field& b, const GeometryCache& geo) {
  return std::abs(l2_inner(a, b, geo)) / (l2_norm(a, geo) * l2_norm(b, geo));
}

GeometryCache curved2(int n = 32) { return build_geometry(MetricField::perturbed(Lattice({n, n}), 0.15, 2, 41)); }
GeometryCache curved3() { return build_geometry(MetricField::perturbed(Lattice({12, 12, 12}), 0.05, 2, 43)); }

}  // namespace

TEST_CASE("flat slice oracle sanity") {
  // constants (3) plus one conformal direction for each of the 8 nonconstant mode functions
  CHECK(flat_slice_dimension(2, 1, 2 * kPi / 16) == 11);
}

TEST_CASE("Berger-Ebin recovers a constructed Killing part") {
  const Lattice lat({32, 32});
  const auto geo = build_geometry(MetricField::flat(lat));
  const auto th0 = zero_mean(random_band_limited<FieldKind::Covector>(lat, 3, 71));
  const auto parts = berger_ebin(delta_star(th0, geo), geo, kTol);
  CHECK(max_abs_diff(parts.theta, th0) <= 1e-7);
  CHECK(l2_norm(parts.divergence_free, geo) <= 1e-7);
}

TEST_CASE("Berger-Ebin leaves constant tensors untouched") {
  const Lattice lat({16, 16});
  const auto geo = build_geometry(MetricField::flat(lat));
  const auto phi = random_band_limited<FieldKind::Sym2>(lat, 0, 3);
  const auto parts = berger_ebin(phi, geo, kTol);
  CHECK(parts.theta.max_abs() <= 1e-14);
  CHECK(max_abs_diff(parts.divergence_free, phi) <= 1e-14);
}

TEST_CASE("Berger-Ebin on a curved metric") {
  for (const auto& geo : {curved2(), curved3()}) {
    const auto phi = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 5);
    const auto parts = berger_ebin(phi, geo, kTol);
    const auto ds = delta_star(parts.theta, geo);
    CHECK(rel_inner(ds, parts.divergence_free, geo) <= 1e-7);
    CHECK(l2_norm(divergence(parts.divergence_free, geo, OperatorMode::Adjoint), geo) <=
          1e-8 * l2_norm(divergence(phi, geo, OperatorMode::Adjoint), geo));
    const double p2 = l2_inner(phi, phi, geo);
    CHECK(std::abs(p2 - l2_inner(ds, ds, geo) - l2_inner(parts.divergence_free, parts.divergence_free, geo)) <= 1e-6 * p2);
    const auto again = berger_ebin(parts.divergence_free, geo, kTol);
    CHECK(l2_norm(again.theta, geo) <= 1e-6 * l2_norm(parts.theta, geo));
  }
}

TEST_CASE("York trivial inputs") {
  SUBCASE("pure trace") {
    const auto geo = curved3();
    const auto parts = york(geo.metric, geo, kTol);
    CHECK(l2_norm(parts.theta, geo) <= 1e-8);
    double lam = 0.0;
    for (double v : parts.lambda.component(0)) lam = std::max(lam, std::abs(v - 1.0));
    CHECK(lam <= 1e-8);
    CHECK(parts.transverse_traceless.max_abs() <= 1e-8);
    CHECK_FALSE(parts.outside_stated_range);
  }
  SUBCASE("constant trace-free on flat T3") {
    const Lattice lat({8, 8, 8});
    const auto geo = build_geometry(MetricField::flat(lat));
    auto phi = random_band_limited<FieldKind::Sym2>(lat, 0, 9);
    auto [tr, tf] = trace_and_tracefree(phi, geo);
    const auto parts = york(tf, geo, kTol);
    CHECK(parts.theta.max_abs() <= 1e-14);
    CHECK(parts.lambda.max_abs() <= 1e-14);
    CHECK(max_abs_diff(parts.transverse_traceless, tf) <= 1e-14);
  }
}

TEST_CASE("York on curved metrics") {
  for (const auto& geo : {curved3(), curved2()}) {
    const auto phi = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 6);
    const auto parts = york(phi, geo, kTol);
    CHECK(parts.outside_stated_range == (geo.dim() == 2));
    const auto& tt = parts.transverse_traceless;
    CHECK(trace(tt, geo).max_abs() <= 1e-12);
    // in 2D the near-kernel (conformal Killing fields) is deflated only approximately
    const double div_tol = geo.dim() == 2 ? 1e-6 : 1e-8;
    CHECK(l2_norm(divergence(tt, geo, OperatorMode::Adjoint), geo) <= div_tol * l2_norm(divergence(phi, geo, OperatorMode::Adjoint), geo));
    const auto gauge = delta_star(parts.theta, geo) + times_metric(parts.lambda, geo);
    CHECK(rel_inner(gauge, tt, geo) <= 1e-7);
    const double p2 = l2_inner(phi, phi, geo);
    CHECK(std::abs(p2 - l2_inner(gauge, gauge, geo) - l2_inner(tt, tt, geo)) <= 1e-6 * p2);
    const auto again = york(tt, geo, kTol);
    CHECK(l2_norm(again.transverse_traceless - tt, geo) <= 1e-6 * l2_norm(tt, geo));
    if (geo.dim() == 3) {
      CHECK(l2_norm(again.theta, geo) <= 1e-6 * l2_norm(parts.theta, geo));
      CHECK(l2_norm(again.lambda, geo) <= 1e-6 * l2_norm(parts.lambda, geo));
    }
  }
}

TEST_CASE("Chen decomposition") {
  SUBCASE("the metric is harmonic") {
    const auto geo = curved3();
    const auto parts = chen(geo.metric, geo, kTol);
    CHECK(l2_norm(parts.theta, geo) <= 1e-8);
    CHECK(max_abs_diff(parts.harmonic, geo.metric) <= 1e-8);
  }
  SUBCASE("construct then recover on flat T2") {
    const Lattice lat({32, 32});
    const auto geo = build_geometry(MetricField::flat(lat));
    const auto th0 = zero_mean(random_band_limited<FieldKind::Covector>(lat, 3, 72));
    const auto parts = chen(alpha_apply(th0, geo, OperatorMode::Adjoint), geo, kTol);
    CHECK(max_abs_diff(parts.theta, th0) <= 1e-7);
  }
  SUBCASE("orthogonality, Pythagoras and idempotence on curved metrics") {
    for (const auto& geo : {curved2(), curved3()}) {
      const auto phi = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 7);
      const auto parts = chen(phi, geo, kTol);
      const auto a = alpha_apply(parts.theta, geo, OperatorMode::Adjoint);
      CHECK(rel_inner(a, parts.harmonic, geo) <= 1e-7);
      CHECK(max_abs_diff(a + parts.harmonic, phi) <= 1e-13);
      const double p2 = l2_inner(phi, phi, geo);
      CHECK(std::abs(p2 - l2_inner(a, a, geo) - l2_inner(parts.harmonic, parts.harmonic, geo)) <= 1e-6 * p2);
      const auto again = chen(parts.harmonic, geo, kTol);
      CHECK(l2_norm(again.theta, geo) <= 1e-6 * l2_norm(parts.theta, geo));
      CHECK(l2_norm(again.harmonic - parts.harmonic, geo) <= 1e-6 * l2_norm(parts.harmonic, geo));
    }
  }
  SUBCASE("solver failure is reported") {
    const auto geo = curved2(16);
    const auto phi = random_band_limited<FieldKind::Sym2>(geo.lattice, 2, 8);
    try {
      chen(phi, geo, kTol, 2);
      FAIL("expected a decomposition error");
    } catch (const DecompositionError& e) {
      CHECK(e.report().iterations == 2);
      CHECK_FALSE(e.report().converged);
    }
  }
}

TEST_CASE("harmonic slice basis") {
  SUBCASE("flat T2 dimension matches the Fourier oracle") {
    const Lattice lat({16, 16});
    const auto geo = build_geometry(MetricField::flat(lat));
    const auto basis = hg_basis(geo, 1, kTol);
    CHECK(static_cast<int>(basis.size()) == flat_slice_dimension(2, 1, lat.spacing(0)));
    const auto basis2 = hg_basis(geo, 2, kTol);
    CHECK(static_cast<int>(basis2.size()) == flat_slice_dimension(2, 2, lat.spacing(0)));
    CHECK(basis2.size() >= basis.size());
  }
  SUBCASE("flat T3 dimension matches the Fourier oracle") {
    const Lattice lat({8, 8, 8});
    const auto geo = build_geometry(MetricField::flat(lat));
    CHECK(static_cast<int>(hg_basis(geo, 1, kTol).size()) == flat_slice_dimension(3, 1, lat.spacing(0)));
  }
  SUBCASE("curved basis is orthonormal, starts with g and lies in the slice") {
    const auto geo = curved2(16);
    const auto basis = hg_basis(geo, 1, kTol);
    const double gnorm = l2_norm(geo.metric, geo);
    CHECK(max_abs_diff(basis[0], geo.metric * (1.0 / gnorm)) <= 1e-14);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(l2_norm(alpha_star_apply(basis[i], geo, OperatorMode::Adjoint), geo) <= 1e-7);
      for (std::size_t j = 0; j <= i; ++j) CHECK(std::abs(l2_inner(basis[i], basis[j], geo) - (i == j)) <= 1e-10);
    }
    CHECK(hg_basis(geo, 2, kTol).size() >= basis.size());
  }
  CHECK_THROWS_AS(hg_basis(build_geometry(MetricField::flat(Lattice({8, 8}))), 3, kTol), DomainError);
}

TEST_CASE("infinitesimal harmonic transformation defect") {
  const Lattice lat({32, 32});
  const auto geo = build_geometry(MetricField::flat(lat));
  CHECK(ihp_residual(random_band_limited<FieldKind::Covector>(lat, 0, 3), geo) == 0.0);
  CHECK(ihp_residual(CovectorField(lat), geo) == 0.0);
  const auto th = field_from<FieldKind::Covector>(lat, [](int c, const Point& p) { return c == 0 ? std::sin(p[0]) : 0.0; });
  // Sampson acts as the positive symbol squared on a single mode; the rms of sin x is 1/sqrt 2
  const double kt = symbol(1, lat.spacing(0));
  CHECK(ihp_residual(th, geo) == doctest::Approx(kt * kt / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(ihp_residual(th, geo) == doctest::Approx(rms_norm(th, geo)).epsilon(1e-4));
}
