#include <cmath>

#include "doctest.h"
#include "harmgauge/metric.hpp"
#include "support.hpp"

using namespace hgauge;
using namespace hgtest;

namespace {

// u = a sin(x) cos(y) [+ b sin(z)], with closed-form derivatives.
struct ConformalFactor {
  double a = 0.2, b = 0.15;
  double u(const Point& p, int n) const { return a * std::sin(p[0]) * std::cos(p[1]) + (n == 3 ? b * std::sin(p[2]) : 0.0); }
  double du(const Point& p, int k) const {
    if (k == 0) return a * std::cos(p[0]) * std::cos(p[1]);
    if (k == 1) return -a * std::sin(p[0]) * std::sin(p[1]);
    return b * std::cos(p[2]);
  }
  double laplacian(const Point& p, int n) const {
    return -2.0 * a * std::sin(p[0]) * std::cos(p[1]) - (n == 3 ? b * std::sin(p[2]) : 0.0);
  }
  // scalar curvature of e^{2u} delta in dimension n
  double scal(const Point& p, int n) const {
    double grad2 = 0.0;
    for (int k = 0; k < n; ++k) grad2 += du(p, k) * du(p, k);
    return std::exp(-2.0 * u(p, n)) * (-2.0 * (n - 1) * laplacian(p, n) - (n - 2.0) * (n - 1.0) * grad2);
  }
};

MetricField conformal_metric(const Lattice& lat, const ConformalFactor& cf) {
  return MetricField::conformal(scalar_from(lat, [&](const Point& p) { return cf.u(p, lat.dim()); }));
}

double scal_error(int n, int dim) {
  const Lattice lat(std::vector<int>(dim, n));
  const ConformalFactor cf;
  const auto geo = build_geometry(conformal_metric(lat, cf));
  double e = 0.0;
  for (std::size_t s = 0; s < lat.site_count(); ++s)
    e = std::max(e, std::abs(geo.scal.at(0, s) - cf.scal(point(lat, s), dim)));
  return e;
}

double christoffel_error(int n) {
  const Lattice lat({n, n});
  const ConformalFactor cf;
  const auto geo = build_geometry(conformal_metric(lat, cf));
  double e = 0.0;
  for (std::size_t s = 0; s < lat.site_count(); ++s) {
    const Point p = point(lat, s);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double exact = (k == i) * cf.du(p, j) + (k == j) * cf.du(p, i) - (i == j) * cf.du(p, k);
          e = std::max(e, std::abs(geo.gamma(k, i, j, s) - exact));
        }
  }
  return e;
}

}  // namespace

TEST_CASE("metric validation") {
  const Lattice lat({8, 8});
  Sym2Field bad = MetricField::flat(lat).tensor();
  bad.sym(0, 1, 13) = 1.5;
  CHECK_THROWS_AS(MetricField{bad}, DomainError);
  try {
    MetricField m{bad};
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("13") != std::string::npos);
  }
  CHECK(MetricField::flat(lat).is_constant());
  CHECK(MetricField::scaled_flat(lat, 2.5).is_constant());
  CHECK_FALSE(MetricField::perturbed(lat, 0.1, 2, 1).is_constant());
  CHECK_THROWS_AS(MetricField::scaled_flat(lat, -1.0), DomainError);
}

TEST_CASE("flat geometry is exactly zero") {
  const Lattice lat({12, 8, 10});
  const auto geo = build_geometry(MetricField::scaled_flat(lat, 3.0));
  CHECK(geo.constant_metric);
  CHECK(geo.christoffel.max_abs() == 0.0);
  CHECK(geo.riemann.max_abs() == 0.0);
  CHECK(geo.ricci.max_abs() == 0.0);
  CHECK(geo.scal.max_abs() == 0.0);
  CHECK(geo.density.at(0, 17) == doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-15));
}

TEST_CASE("Christoffel symbols of a conformal metric") {
  CHECK(christoffel_error(32) <= 1e-4);
  CHECK(order(christoffel_error(32), christoffel_error(64)) >= 3.5);
}

TEST_CASE("scalar curvature of conformal metrics") {
  CHECK(scal_error(32, 2) <= 1e-3);
  CHECK(order(scal_error(32, 2), scal_error(64, 2)) >= 3.5);
  CHECK(order(scal_error(16, 3), scal_error(32, 3)) >= 3.5);
}

TEST_CASE("curvature tensor symmetries") {
  const Lattice lat({16, 16, 16});
  const auto geo = build_geometry(MetricField::perturbed(lat, 0.1, 2, 9));
  double anti = 0.0, pair = 0.0, ric_sym = 0.0;
  for (std::size_t s = 0; s < lat.site_count(); s += 7)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            anti = std::max(anti, std::abs(geo.riem(a, b, c, d, s) + geo.riem(b, a, c, d, s)));
            anti = std::max(anti, std::abs(geo.riem(a, b, c, d, s) + geo.riem(a, b, d, c, s)));
            pair = std::max(pair, std::abs(geo.riem(a, b, c, d, s) - geo.riem(c, d, a, b, s)));
          }
        ric_sym = std::max(ric_sym, std::abs(geo.ricci.sym(a, b, s) - geo.ricci.sym(b, a, s)));
      }
  CHECK(anti <= 1e-13);
  CHECK(pair <= 1e-13);
  CHECK(ric_sym == 0.0);
  CHECK(geo.raw_antisymmetry_defect < 5e-2);
  CHECK(geo.raw_pair_defect < 5e-2);

  // raw defects are discretization error, shrinking under refinement
  const auto fine = build_geometry(MetricField::perturbed(Lattice({32, 32, 32}), 0.1, 2, 9));
  CHECK(fine.raw_pair_defect < geo.raw_pair_defect / 8.0);
}

TEST_CASE("two-dimensional Ricci is half the scalar curvature times g") {
  const Lattice lat({24, 24});
  const auto geo = build_geometry(MetricField::perturbed(lat, 0.2, 3, 4));
  double e = 0.0;
  for (std::size_t s = 0; s < lat.site_count(); ++s)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        e = std::max(e, std::abs(geo.ricci.sym(i, j, s) - 0.5 * geo.scal.at(0, s) * geo.metric.sym(i, j, s)));
  CHECK(e <= 1e-12);
}

TEST_CASE("the covariant derivative annihilates the metric") {
  // Christoffels are built from the same stencil, so this holds to rounding.
  const Lattice lat({16, 16, 16});
  const MetricField g = MetricField::perturbed(lat, 0.05, 2, 21);
  CHECK(covariant_derivative(g.tensor(), build_geometry(g)).max_abs() <= 1e-13);
}

TEST_CASE("L2 products against closed forms") {
  const Lattice lat({16, 16, 8});
  const double c = 2.0;
  const auto geo = build_geometry(MetricField::scaled_flat(lat, c));
  const auto h = field_from<FieldKind::Sym2>(lat, [](int comp, const Point& p) { return (comp + 1) * std::cos(p[0]); });
  // pointwise |h|^2 = c^-2 sum_ij h_ij^2, density c^{3/2}, integral of cos^2 over T^3 = 4 pi^3
  double weight = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int comp = sym_slot(i, j, 3);
      weight += (comp + 1.0) * (comp + 1.0);
    }
  CHECK(l2_inner(h, h, geo) == doctest::Approx(weight * std::pow(c, -0.5) * 4 * std::pow(kPi, 3)).epsilon(1e-12));

  const auto th = field_from<FieldKind::Covector>(lat, [](int comp, const Point& p) { return comp == 1 ? std::sin(p[1]) : 0.0; });
  CHECK(l2_inner(th, th, geo) == doctest::Approx(std::pow(c, 0.5) * 4 * std::pow(kPi, 3)).epsilon(1e-12));
  CHECK(l2_norm(th, geo) == doctest::Approx(std::sqrt(std::pow(c, 0.5) * 4 * std::pow(kPi, 3))).epsilon(1e-12));
}

TEST_CASE("raise and lower are inverse") {
  const Lattice lat({12, 12});
  const auto geo = build_geometry(MetricField::perturbed(lat, 0.3, 2, 5));
  const auto th = random_band_limited<FieldKind::Covector>(lat, 2, 8);
  CHECK(max_abs_diff(lower(raise(th, geo), geo), th) <= 1e-14);
  // <theta, theta> computed through either index position agrees
  CHECK(l2_inner(raise(th, geo), raise(th, geo), geo) == doctest::Approx(l2_inner(th, th, geo)).epsilon(1e-13));
}
