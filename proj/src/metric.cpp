#include "harmgauge/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harmgauge/site_algebra.hpp"

namespace hgauge {

using site::Mat;

MetricField::MetricField(Sym2Field g) : g_(std::move(g)) {
  const int n = g_.lattice().dim();
  for (std::size_t s = 0; s < g_.sites(); ++s) {
    if (!site::is_spd(site::load_sym(g_, s), n))
      throw DomainError("metric is not positive definite at site " + std::to_string(s));
  }
}

MetricField MetricField::flat(const Lattice& lattice) { return scaled_flat(lattice, 1.0); }

MetricField MetricField::scaled_flat(const Lattice& lattice, double c) {
  const int n = lattice.dim();
  Sym2Field g(lattice);
  for (int i = 0; i < n; ++i)
    for (double& v : g.component(sym_slot(i, i, n))) v = c;
  return MetricField(std::move(g));
}

MetricField MetricField::conformal(const ScalarField& u) {
  const int n = u.lattice().dim();
  Sym2Field g(u.lattice());
  for (std::size_t s = 0; s < u.sites(); ++s) {
    const double w = std::exp(2.0 * u.at(0, s));
    for (int i = 0; i < n; ++i) g.sym(i, i, s) = w;
  }
  return MetricField(std::move(g));
}

MetricField MetricField::perturbed(const Lattice& lattice, double amplitude, int max_mode, std::uint64_t seed) {
  Sym2Field p = random_band_limited<FieldKind::Sym2>(lattice, max_mode, seed);
  p *= amplitude;
  p += flat(lattice).tensor();
  return MetricField(std::move(p));
}

bool MetricField::is_constant() const {
  for (int c = 0; c < g_.components(); ++c) {
    auto comp = g_.component(c);
    for (double v : comp)
      if (v != comp[0]) return false;
  }
  return true;
}

GeometryCache build_geometry(const MetricField& g) {
  const Lattice& lat = g.lattice();
  const int n = lat.dim();
  const int ns = sym_count(n);
  const std::size_t N = lat.site_count();

  GeometryCache geo{.lattice = lat,
                    .metric = g.tensor(),
                    .inverse = Sym2Field(lat),
                    .density = ScalarField(lat),
                    .christoffel = Sym2GradField(lat),
                    .riemann = Rank4Field(lat),
                    .ricci = Sym2Field(lat),
                    .scal = ScalarField(lat),
                    .killing_christoffel = Sym2GradField(lat)};
  geo.constant_metric = g.is_constant();

  for (std::size_t s = 0; s < N; ++s) {
    const Mat m = site::load_sym(geo.metric, s);
    site::store_sym(geo.inverse, s, site::inverse(m, n));
    geo.density.at(0, s) = std::sqrt(site::determinant(m, n));
  }

  if (geo.constant_metric) return geo;  // every derivative vanishes

  // dg[a*ns + slot] = d_a g_slot
  std::vector<std::vector<double>> dg(static_cast<std::size_t>(n * ns));
  for (int a = 0; a < n; ++a)
    for (int q = 0; q < ns; ++q) dg[a * ns + q] = partial_derivative(lat, geo.metric.component(q), a);

  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      const Mat gi = site::load_sym(geo.inverse, s);
      auto d = [&](int a, int i, int j) { return dg[a * ns + sym_slot(i, j, n)][s]; };
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = 0.0;
            for (int l = 0; l < n; ++l) v += gi[k][l] * (d(i, j, l) + d(j, i, l) - d(l, i, j));
            geo.christoffel.at(k * ns + sym_slot(i, j, n), s) = 0.5 * v;
          }
    }
  });

  // c^k = (-d_i(w g^{ik}) - w g^{ab} Gamma^k_ab) / w, spread over the trace part
  {
    std::vector<double> flux(N), dflux(N);
    std::vector<std::vector<double>> div(n, std::vector<double>(N, 0.0));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < N; ++s) flux[s] = geo.density.at(0, s) * geo.inverse.sym(i, k, s);
        partial_derivative(lat, flux, dflux, i);
        for (std::size_t s = 0; s < N; ++s) div[k][s] -= dflux[s];
      }
    geo.killing_christoffel = geo.christoffel;
    parallel_for(N, [&](std::size_t s0, std::size_t s1) {
      for (std::size_t s = s0; s < s1; ++s) {
        const double w = geo.density.at(0, s);
        for (int k = 0; k < n; ++k) {
          double contracted = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) contracted += geo.inverse.sym(a, b, s) * geo.gamma(k, a, b, s);
          const double c = div[k][s] / w - contracted;
          for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
              geo.killing_christoffel.at(k * ns + sym_slot(i, j, n), s) += c * geo.metric.sym(i, j, s) / n;
        }
      }
    });
  }

  // dG[(c*n + k)*ns + slot] = d_c Gamma^k_slot
  std::vector<std::vector<double>> dG(static_cast<std::size_t>(n * n * ns));
  for (int c = 0; c < n; ++c)
    for (int q = 0; q < n * ns; ++q) dG[c * n * ns + q] = partial_derivative(lat, geo.christoffel.component(q), c);

  std::vector<double> anti(N, 0.0), pair(N, 0.0);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    std::vector<double> up(static_cast<std::size_t>(n * n * n * n)), low(up.size()), sym(up.size());
    auto idx = [n](int a, int b, int c, int d) { return ((a * n + b) * n + c) * n + d; };
    for (std::size_t s = s0; s < s1; ++s) {
      const Mat gm = site::load_sym(geo.metric, s);
      const Mat gi = site::load_sym(geo.inverse, s);
      auto G = [&](int k, int i, int j) { return geo.christoffel.at(k * ns + sym_slot(i, j, n), s); };
      auto dGam = [&](int c, int k, int i, int j) { return dG[(c * n + k) * ns + sym_slot(i, j, n)][s]; };
      // R^a_{bcd} = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              double v = dGam(c, a, d, b) - dGam(d, a, c, b);
              for (int e = 0; e < n; ++e) v += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
              up[idx(a, b, c, d)] = v;
            }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              double v = 0.0;
              for (int e = 0; e < n; ++e) v += gm[a][e] * up[idx(e, b, c, d)];
              low[idx(a, b, c, d)] = v;
            }
      double da = 0.0, dp = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              da = std::max(da, std::abs(low[idx(a, b, c, d)] + low[idx(b, a, c, d)]));
              dp = std::max(dp, std::abs(low[idx(a, b, c, d)] - low[idx(c, d, a, b)]));
              sym[idx(a, b, c, d)] = 0.25 * (low[idx(a, b, c, d)] - low[idx(b, a, c, d)] - low[idx(a, b, d, c)] +
                                             low[idx(b, a, d, c)]);
            }
      anti[s] = da;
      pair[s] = dp;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d)
              geo.riemann.at(idx(a, b, c, d), s) = 0.5 * (sym[idx(a, b, c, d)] + sym[idx(c, d, a, b)]);

      Mat ric{};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) v += gi[k][l] * geo.riemann.at(idx(k, i, l, j), s);
          ric[i][j] = v;
        }
      site::store_sym(geo.ricci, s, ric);
      geo.scal.at(0, s) = site::trace_with(gi, ric, n);
    }
  });
  geo.raw_antisymmetry_defect = *std::max_element(anti.begin(), anti.end());
  geo.raw_pair_defect = *std::max_element(pair.begin(), pair.end());
  return geo;
}

// ---------------------------------------------------------------------------

Cov2Field covariant_derivative(const CovectorField& theta, const GeometryCache& geo) {
  check_lattice(theta.lattice(), geo.lattice);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  Cov2Field out(lat);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) partial_derivative(lat, theta.component(j), out.component(i * n + j), i);
  if (geo.constant_metric) return out;
  parallel_for(lat.site_count(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k) v += geo.gamma(k, i, j, s) * theta.at(k, s);
          out.at(i * n + j, s) -= v;
        }
  });
  return out;
}

Sym2GradField covariant_derivative(const Sym2Field& h, const GeometryCache& geo) {
  check_lattice(h.lattice(), geo.lattice);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const int ns = sym_count(n);
  Sym2GradField out(lat);
  for (int k = 0; k < n; ++k)
    for (int q = 0; q < ns; ++q) partial_derivative(lat, h.component(q), out.component(k * ns + q), k);
  if (geo.constant_metric) return out;
  parallel_for(lat.site_count(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = 0.0;
            for (int l = 0; l < n; ++l) v += geo.gamma(l, k, i, s) * h.sym(l, j, s) + geo.gamma(l, k, j, s) * h.sym(i, l, s);
            out.at(k * ns + sym_slot(i, j, n), s) -= v;
          }
  });
  return out;
}

Rank4Field covariant_derivative(const Sym2GradField& t, const GeometryCache& geo) {
  check_lattice(t.lattice(), geo.lattice);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const int ns = sym_count(n);
  auto T = [&](int k, int i, int j, std::size_t s) { return t.at(k * ns + sym_slot(i, j, n), s); };
  Rank4Field out(lat);
  std::vector<double> d(lat.site_count());
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          auto dst = out.component(((l * n + k) * n + i) * n + j);
          if (j >= i) {
            partial_derivative(lat, t.component(k * ns + sym_slot(i, j, n)), dst, l);
          } else {
            auto src = out.component(((l * n + k) * n + j) * n + i);
            std::copy(src.begin(), src.end(), dst.begin());
          }
        }
  if (geo.constant_metric) return out;
  parallel_for(lat.site_count(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s)
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double v = 0.0;
              for (int m = 0; m < n; ++m)
                v += geo.gamma(m, l, k, s) * T(m, i, j, s) + geo.gamma(m, l, i, s) * T(k, m, j, s) +
                     geo.gamma(m, l, j, s) * T(k, i, m, s);
              out.at(((l * n + k) * n + i) * n + j, s) -= v;
            }
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class Pointwise>
double weighted_integral(const GeometryCache& geo, Pointwise&& pw) {
  const std::size_t N = geo.lattice.site_count();
  std::vector<double> v(N);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) v[s] = pw(s) * geo.density.at(0, s);
  });
  return pairwise_sum(v) * geo.lattice.cell_volume();
}

}  // namespace

double l2_inner(const ScalarField& a, const ScalarField& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  return weighted_integral(geo, [&](std::size_t s) { return a.at(0, s) * b.at(0, s); });
}

double l2_inner(const CovectorField& a, const CovectorField& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  const int n = geo.dim();
  return weighted_integral(geo, [&](std::size_t s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += geo.inverse.sym(i, j, s) * a.at(i, s) * b.at(j, s);
    return v;
  });
}

double l2_inner(const VectorField& a, const VectorField& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  const int n = geo.dim();
  return weighted_integral(geo, [&](std::size_t s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += geo.metric.sym(i, j, s) * a.at(i, s) * b.at(j, s);
    return v;
  });
}

double l2_inner(const Sym2Field& a, const Sym2Field& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  const int n = geo.dim();
  return weighted_integral(geo, [&](std::size_t s) {
    return site::pair_sym(site::load_sym(geo.inverse, s), site::load_sym(a, s), site::load_sym(b, s), n);
  });
}

double l2_inner(const Cov2Field& a, const Cov2Field& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  const int n = geo.dim();
  return weighted_integral(geo, [&](std::size_t s) {
    const site::Mat gi = site::load_sym(geo.inverse, s);
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) v += gi[i][k] * gi[j][l] * a.at(i * n + j, s) * b.at(k * n + l, s);
    return v;
  });
}

double l2_inner(const Sym2GradField& a, const Sym2GradField& b, const GeometryCache& geo) {
  check_lattice(a.lattice(), geo.lattice);
  check_lattice(b.lattice(), geo.lattice);
  const int n = geo.dim();
  const int ns = sym_count(n);
  return weighted_integral(geo, [&](std::size_t s) {
    const site::Mat gi = site::load_sym(geo.inverse, s);
    double v = 0.0;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        site::Mat ak{}, bl{};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            ak[i][j] = a.at(k * ns + sym_slot(i, j, n), s);
            bl[i][j] = b.at(l * ns + sym_slot(i, j, n), s);
          }
        v += gi[k][l] * site::pair_sym(gi, ak, bl, n);
      }
    return v;
  });
}

double l2_inner(const Sym2Field& a, const Sym2Field& b, const MetricField& g) {
  return l2_inner(a, b, build_geometry(g));
}

double l2_inner(const CovectorField& a, const CovectorField& b, const MetricField& g) {
  return l2_inner(a, b, build_geometry(g));
}

VectorField raise(const CovectorField& theta, const GeometryCache& geo) {
  check_lattice(theta.lattice(), geo.lattice);
  const int n = geo.dim();
  VectorField out(geo.lattice);
  for (std::size_t s = 0; s < geo.lattice.site_count(); ++s)
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += geo.inverse.sym(i, j, s) * theta.at(j, s);
      out.at(i, s) = v;
    }
  return out;
}

CovectorField lower(const VectorField& xi, const GeometryCache& geo) {
  check_lattice(xi.lattice(), geo.lattice);
  const int n = geo.dim();
  CovectorField out(geo.lattice);
  for (std::size_t s = 0; s < geo.lattice.site_count(); ++s)
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += geo.metric.sym(i, j, s) * xi.at(j, s);
      out.at(i, s) = v;
    }
  return out;
}

}  // namespace hgauge
