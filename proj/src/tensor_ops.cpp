#include "harmgauge/tensor_ops.hpp"

#include "harmgauge/site_algebra.hpp"

namespace hgauge {

using site::Mat;

namespace {

void check(const Lattice& a, const GeometryCache& geo) { check_lattice(a, geo.lattice); }

}  // namespace

Sym2Field delta_star(const CovectorField& theta, const GeometryCache& geo) {
  check(theta.lattice(), geo);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const std::size_t N = lat.site_count();
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i * n + j] = partial_derivative(lat, theta.component(j), i);
  Sym2Field out(lat);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = 0.5 * (d[i * n + j][s] + d[j * n + i][s]);
          if (!geo.constant_metric)
            for (int k = 0; k < n; ++k) v -= geo.killing_gamma(k, i, j, s) * theta.at(k, s);
          out.sym(i, j, s) = v;
        }
  });
  return out;
}

CovectorField divergence(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode) {
  check(h.lattice(), geo);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const int ns = sym_count(n);
  const std::size_t N = lat.site_count();
  CovectorField out(lat);
  if (mode == OperatorMode::Analytic) {
    const Sym2GradField dh = covariant_derivative(h, geo);
    parallel_for(N, [&](std::size_t s0, std::size_t s1) {
      for (std::size_t s = s0; s < s1; ++s)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) v += geo.inverse.sym(i, k, s) * dh.at(i * ns + sym_slot(k, j, n), s);
          out.at(j, s) = -v;
        }
    });
    return out;
  }
  // Phi^{ij} = w g^{ia} g^{jb} h_ab
  Sym2Field phi(lat);
  for (std::size_t s = 0; s < N; ++s) {
    const Mat gi = site::load_sym(geo.inverse, s);
    const Mat hm = site::load_sym(h, s);
    const double w = geo.density.at(0, s);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) v += gi[i][a] * gi[j][b] * hm[a][b];
        phi.sym(i, j, s) = w * v;
      }
  }
  // v^j = -d_i Phi^{ij} - Gamma^j_ab Phi^{ab}
  std::vector<double> v(static_cast<std::size_t>(n) * N, 0.0), tmp(N);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      partial_derivative(lat, phi.component(sym_slot(i, j, n)), tmp, i);
      for (std::size_t s = 0; s < N; ++s) v[j * N + s] -= tmp[s];
    }
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      site::Vec up{};
      for (int j = 0; j < n; ++j) {
        double x = v[j * N + s];
        if (!geo.constant_metric)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) x -= geo.killing_gamma(j, a, b, s) * phi.sym(a, b, s);
        up[j] = x;
      }
      const double w = geo.density.at(0, s);
      for (int i = 0; i < n; ++i) {
        double x = 0.0;
        for (int j = 0; j < n; ++j) x += geo.metric.sym(i, j, s) * up[j];
        out.at(i, s) = x / w;
      }
    }
  });
  return out;
}

ScalarField divergence(const CovectorField& theta, const GeometryCache& geo, OperatorMode mode) {
  check(theta.lattice(), geo);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const std::size_t N = lat.site_count();
  ScalarField out(lat);
  std::vector<double> tmp(N);
  if (mode == OperatorMode::Analytic) {
    // -g^{ij} (d_i theta_j - Gamma~^k_ij theta_k), matching the trace of delta*
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i * n + j] = partial_derivative(lat, theta.component(j), i);
    for (std::size_t s = 0; s < N; ++s) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double x = d[i * n + j][s];
          if (!geo.constant_metric)
            for (int k = 0; k < n; ++k) x -= geo.killing_gamma(k, i, j, s) * theta.at(k, s);
          v += geo.inverse.sym(i, j, s) * x;
        }
      out.at(0, s) = -v;
    }
    return out;
  }
  // -(1/w) d_i (w g^{ij} theta_j)
  std::vector<double> flux(N);
  for (int i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < N; ++s) {
      double x = 0.0;
      for (int j = 0; j < n; ++j) x += geo.inverse.sym(i, j, s) * theta.at(j, s);
      flux[s] = geo.density.at(0, s) * x;
    }
    partial_derivative(lat, flux, tmp, i);
    for (std::size_t s = 0; s < N; ++s) out.at(0, s) -= tmp[s];
  }
  for (std::size_t s = 0; s < N; ++s) out.at(0, s) /= geo.density.at(0, s);
  return out;
}

CovectorField exterior_derivative(const ScalarField& f) {
  const Lattice& lat = f.lattice();
  CovectorField out(lat);
  for (int a = 0; a < lat.dim(); ++a) partial_derivative(lat, f.component(0), out.component(a), a);
  return out;
}

ScalarField trace(const Sym2Field& h, const GeometryCache& geo) {
  check(h.lattice(), geo);
  const int n = geo.dim();
  ScalarField out(geo.lattice);
  for (std::size_t s = 0; s < out.sites(); ++s)
    out.at(0, s) = site::trace_with(site::load_sym(geo.inverse, s), site::load_sym(h, s), n);
  return out;
}

Sym2Field times_metric(const ScalarField& lambda, const GeometryCache& geo) {
  check(lambda.lattice(), geo);
  Sym2Field out = geo.metric;
  for (int q = 0; q < out.components(); ++q) {
    auto c = out.component(q);
    for (std::size_t s = 0; s < c.size(); ++s) c[s] *= lambda.at(0, s);
  }
  return out;
}

std::pair<ScalarField, Sym2Field> trace_and_tracefree(const Sym2Field& h, const GeometryCache& geo) {
  ScalarField tr = trace(h, geo);
  ScalarField third = tr;
  third *= 1.0 / geo.dim();
  Sym2Field h0 = h - times_metric(third, geo);
  return {std::move(tr), std::move(h0)};
}

CovectorField sampson_laplacian(const CovectorField& theta, const GeometryCache& geo, OperatorMode mode) {
  CovectorField out = divergence(delta_star(theta, geo), geo, mode);
  out *= 2.0;
  out -= exterior_derivative(divergence(theta, geo, mode));
  return out;
}

Sym2Field covariant_derivative_adjoint(const Sym2GradField& t, const GeometryCache& geo) {
  check(t.lattice(), geo);
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  const int ns = sym_count(n);
  const std::size_t N = lat.site_count();
  // A^{kij} = w g^{ka} g^{ib} g^{jc} T_abc, symmetric in (i, j)
  Sym2GradField up(lat);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      const Mat gi = site::load_sym(geo.inverse, s);
      const double w = geo.density.at(0, s);
      Mat tk[kMaxDim];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) tk[a][b][c] = t.at(a * ns + sym_slot(b, c, n), s);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = 0.0;
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) v += gi[k][a] * gi[i][b] * gi[j][c] * tk[a][b][c];
            up.at(k * ns + sym_slot(i, j, n), s) = w * v;
          }
    }
  });
  // V^{pq} = -d_k A^{kpq} - Gamma^p_ki A^{kiq} - Gamma^q_kj A^{kpj}
  Sym2Field vv(lat);
  std::vector<double> tmp(N);
  for (int q = 0; q < ns; ++q)
    for (int k = 0; k < n; ++k) {
      partial_derivative(lat, up.component(k * ns + q), tmp, k);
      auto c = vv.component(q);
      for (std::size_t s = 0; s < N; ++s) c[s] -= tmp[s];
    }
  Sym2Field out(lat);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      Mat V = site::load_sym(vv, s);
      if (!geo.constant_metric) {
        auto A = [&](int k, int i, int j) { return up.at(k * ns + sym_slot(i, j, n), s); };
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            double x = 0.0;
            for (int k = 0; k < n; ++k)
              for (int i = 0; i < n; ++i) x += geo.gamma(p, k, i, s) * A(k, i, q) + geo.gamma(q, k, i, s) * A(k, p, i);
            V[p][q] -= x;
          }
      }
      const Mat gm = site::load_sym(geo.metric, s);
      const double w = geo.density.at(0, s);
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          double x = 0.0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) x += gm[a][p] * gm[b][q] * V[p][q];
          out.sym(a, b, s) = x / w;
        }
    }
  });
  return out;
}

Sym2Field rough_laplacian(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode) {
  check(h.lattice(), geo);
  if (mode == OperatorMode::Adjoint) {
    Sym2Field out = covariant_derivative_adjoint(covariant_derivative(h, geo), geo);
    out *= -1.0;
    return out;
  }
  const int n = geo.dim();
  const Rank4Field dd = covariant_derivative(covariant_derivative(h, geo), geo);
  Sym2Field out(geo.lattice);
  parallel_for(out.sites(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = 0.0;
          for (int l = 0; l < n; ++l)
            for (int k = 0; k < n; ++k) v += geo.inverse.sym(l, k, s) * dd.at(((l * n + k) * n + i) * n + j, s);
          out.sym(i, j, s) = v;
        }
  });
  return out;
}

Sym2Field curv2k_apply(const Sym2Field& h, const GeometryCache& geo) {
  check(h.lattice(), geo);
  const int n = geo.dim();
  Sym2Field out(geo.lattice);
  if (geo.constant_metric) return out;
  parallel_for(out.sites(), [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      const Mat gi = site::load_sym(geo.inverse, s);
      const Mat hm = site::load_sym(h, s);
      Mat hu{};
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) v += gi[k][a] * gi[l][b] * hm[a][b];
          hu[k][l] = v;
        }
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) v += geo.riem(i, k, j, l, s) * hu[k][l];
          out.sym(i, j, s) = v;
        }
    }
  });
  return out;
}

Sym2Field lichnerowicz(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode) {
  Sym2Field out = rough_laplacian(h, geo, mode);
  if (geo.constant_metric) return out;
  const int n = geo.dim();
  const Sym2Field rh = curv2k_apply(h, geo);
  for (std::size_t s = 0; s < out.sites(); ++s) {
    const Mat gi = site::load_sym(geo.inverse, s);
    const Mat ric = site::load_sym(geo.ricci, s);
    const Mat hm = site::load_sym(h, s);
    Mat rmix{};  // R_i^k = g^{kl} R_il
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int l = 0; l < n; ++l) v += gi[k][l] * ric[i][l];
        rmix[i][k] = v;
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 2.0 * rh.sym(i, j, s);
        for (int k = 0; k < n; ++k) v -= rmix[i][k] * hm[k][j] + rmix[j][k] * hm[i][k];
        out.sym(i, j, s) += v;
      }
  }
  return out;
}

Sym2Field alpha_apply(const CovectorField& theta, const GeometryCache& geo, OperatorMode mode) {
  ScalarField half = divergence(theta, geo, mode);
  half *= 0.5;
  return delta_star(theta, geo) + times_metric(half, geo);
}

CovectorField alpha_star_apply(const Sym2Field& h, const GeometryCache& geo, OperatorMode mode) {
  ScalarField half = trace(h, geo);
  half *= 0.5;
  return divergence(h, geo, mode) + exterior_derivative(half);
}

}  // namespace hgauge
