#include "harmgauge/eh_variation.hpp"

#include <cmath>
#include <limits>

namespace hgauge {

using site::Mat;

double eh_functional(const GeometryCache& geo) { return integrate(geo.scal, geo.density); }

Sym2Field einstein_tensor(const GeometryCache& geo) {
  Sym2Field ein = geo.ricci;
  ein.add_scaled(-0.5, times_metric(geo.scal, geo));
  return ein;
}

namespace {

Sym2Field shifted(const GeometryCache& geo, double t, const Sym2Field& h) {
  Sym2Field g = geo.metric;
  g.add_scaled(t, h);
  return g;
}

double functional_at(const GeometryCache& geo, double t, const Sym2Field& h) {
  return eh_functional(build_geometry(MetricField(shifted(geo, t, h))));
}

bool admissible(const GeometryCache& geo, double t, const Sym2Field& h) {
  const int n = geo.dim();
  for (double s : {t, -t}) {
    const Sym2Field g = shifted(geo, s, h);
    for (std::size_t i = 0; i < g.sites(); ++i)
      if (!site::is_spd(site::load_sym(g, i), n)) return false;
  }
  return true;
}

double admissible_step(const GeometryCache& geo, const Sym2Field& h, double t) {
  for (int attempt = 0; attempt <= 4; ++attempt, t *= 0.5)
    if (admissible(geo, t, h)) return t;
  throw DomainError("metric leaves the positive definite cone at every probe step; supply a smaller t");
}

}  // namespace

double default_probe_step(const GeometryCache& geo, const Sym2Field& h) {
  const double hn = l2_norm(h, geo);
  require(hn > 0.0, "variation direction must be nonzero");
  return 1e-3 * l2_norm(geo.metric, geo) / hn;
}

VariationReport first_variation(const GeometryCache& geo, const Sym2Field& h, double t) {
  check_lattice(h.lattice(), geo.lattice);
  VariationReport rep;
  rep.t = admissible_step(geo, h, t > 0.0 ? t : default_probe_step(geo, h));

  auto central = [&](double s) { return (functional_at(geo, s, h) - functional_at(geo, -s, h)) / (2.0 * s); };
  const double coarse = central(rep.t), fine = central(0.5 * rep.t);
  rep.fd = (4.0 * fine - coarse) / 3.0;
  rep.fd_error = std::abs(rep.fd - fine);

  rep.analytic = -l2_inner(einstein_tensor(geo), h, geo);
  rep.theorem4_value = -l2_inner(geo.ricci, h, geo);
  rep.theorem4_gap = rep.analytic - rep.theorem4_value;
  ScalarField integrand = trace(h, geo);
  for (std::size_t s = 0; s < integrand.sites(); ++s) integrand.at(0, s) *= geo.scal.at(0, s);
  rep.gap_direct = 0.5 * integrate(integrand, geo.density);
  return rep;
}

double chen_membership(const Sym2Field& h, const GeometryCache& geo) {
  const double hn = l2_norm(h, geo);
  if (hn == 0.0) return 0.0;
  return l2_norm(alpha_star_apply(h, geo, OperatorMode::Analytic), geo) / hn;
}

MembershipLadder chen_membership_ladder(const Sym2Field& h, const GeometryCache& geo, const std::vector<double>& ts) {
  check_lattice(h.lattice(), geo.lattice);
  const int n = geo.dim();
  const std::size_t N = geo.lattice.site_count();
  MembershipLadder out;
  out.membership = chen_membership(h, geo);
  for (double t : ts) {
    require(t > 0.0, "ladder steps must be positive");
    const GeometryCache target = build_geometry(MetricField(shifted(geo, t, h)));
    // Identity map: d_i f^a = delta, so tau^a = g^{ij}(Gammabar^a_ij - Gamma^a_ij).
    VectorField tau(geo.lattice);
    for (std::size_t s = 0; s < N; ++s)
      for (int a = 0; a < n; ++a) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) v += geo.inverse.sym(i, j, s) * (target.gamma(a, i, j, s) - geo.gamma(a, i, j, s));
        tau.at(a, s) = v;
      }
    CovectorField residual = divergence(target.metric, geo, OperatorMode::Analytic);
    residual.add_scaled(0.5, exterior_derivative(trace(target.metric, geo)));
    for (std::size_t s = 0; s < N; ++s)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a) v += target.metric.sym(a, j, s) * tau.at(a, s);
        residual.at(j, s) += v;
      }
    out.rungs.push_back({.t = t, .tension = l2_norm(tau, geo), .identity = l2_norm(residual, geo)});
  }
  // least-squares slope of log tension against log t over rungs with nonzero tension
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : out.rungs)
    if (r.tension > 0.0) {
      const double x = std::log(r.t), y = std::log(r.tension);
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++m;
    }
  if (m >= 2) out.tension_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

Sym2Field lh_apply(const Sym2Field& h, const GeometryCache& geo) {
  Sym2Field out = lichnerowicz(h, geo, OperatorMode::Adjoint);
  out += curv2k_apply(h, geo);
  return out;
}

namespace {

std::vector<double> submatrix_eigenvalues(const DenseMatrix& m, int skip) {
  DenseMatrix sub(m.n - 1);
  for (int i = 0, r = 0; i < m.n; ++i) {
    if (i == skip) continue;
    for (int j = 0, c = 0; j < m.n; ++j) {
      if (j == skip) continue;
      sub(r, c++) = m(i, j);
    }
    ++r;
  }
  return jacobi_eigensolve(sub).values;
}

DenseMatrix symmetrized(const DenseMatrix& m) {
  DenseMatrix out(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

}  // namespace

SpectrumReport hessian_on_slice(const GeometryCache& geo, const std::vector<Sym2Field>& basis, double t) {
  require(!basis.empty(), "slice basis is empty");
  const int m = static_cast<int>(basis.size());
  for (const auto& b : basis) check_lattice(b.lattice(), geo.lattice);

  SpectrumReport rep;
  rep.basis_size = m;
  // Unit basis vectors; the pair directions b_i + b_j reach norm 2.
  double step = t > 0.0 ? t : 1e-3 * l2_norm(geo.metric, geo);
  for (int attempt = 0;; ++attempt, step *= 0.5) {
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) ok = admissible(geo, 2.0 * step, basis[i]);
    if (ok) break;
    if (attempt == 4) throw DomainError("slice probes leave the positive definite cone; supply a smaller t");
  }
  rep.t = step;
  const double e0 = eh_functional(geo);

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) pairs.emplace_back(i, j);

  DenseMatrix fd(m), op(m);
  parallel_for(pairs.size(), [&](std::size_t p0, std::size_t p1) {
    for (std::size_t p = p0; p < p1; ++p) {
      const auto [i, j] = pairs[p];
      const Sym2Field plus = basis[i] + basis[j];
      const Sym2Field minus = basis[i] - basis[j];
      // Polarized second difference at step s; entry (j, i) sums the same values in the other order.
      auto polar = [&](double s) {
        const double pp = functional_at(geo, s, plus), mm = functional_at(geo, -s, plus);
        const double pm = i == j ? e0 : functional_at(geo, s, minus);
        const double mp = i == j ? e0 : functional_at(geo, -s, minus);
        const double d = 4.0 * s * s;
        return std::pair{(((pp - pm) - mp) + mm) / d, (((pp - mp) - pm) + mm) / d};
      };
      const auto [c_ij, c_ji] = polar(step);
      const auto [f_ij, f_ji] = polar(0.5 * step);
      fd(i, j) = (4.0 * f_ij - c_ij) / 3.0;
      fd(j, i) = (4.0 * f_ji - c_ji) / 3.0;
    }
  });

  std::vector<Sym2Field> applied(m);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) applied[b] = lh_apply(basis[b], geo);
  });
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) op(i, j) = l2_inner(applied[i], basis[j], geo);

  rep.fd_symmetry_defect = symmetry_defect(fd);
  rep.op_symmetry_defect = symmetry_defect(op);
  rep.fd_matrix = symmetrized(fd);
  rep.op_matrix = symmetrized(op);
  rep.fd_eigenvalues = jacobi_eigensolve(rep.fd_matrix).values;
  rep.op_eigenvalues = jacobi_eigensolve(rep.op_matrix).values;
  double disc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) disc += std::pow(rep.fd_matrix(i, j) - rep.op_matrix(i, j), 2);
  rep.discrepancy = std::sqrt(disc);

  const double gnorm = l2_norm(geo.metric, geo);
  const double n = geo.dim();
  rep.scaling_second_derivative = (n / 2 - 1) * (n / 2 - 2) * e0 / (gnorm * gnorm);
  const double alignment = std::abs(l2_inner(basis[0], geo.metric, geo)) / (gnorm * l2_norm(basis[0], geo));
  if (alignment > 1.0 - 1e-10) {
    rep.metric_rayleigh_fd = rep.fd_matrix(0, 0);
    rep.metric_rayleigh_op = rep.op_matrix(0, 0);
    if (m > 1) {
      rep.complement_min_fd = submatrix_eigenvalues(rep.fd_matrix, 0).front();
      rep.complement_min_op = submatrix_eigenvalues(rep.op_matrix, 0).front();
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

int r4(int a, int b, int c, int d, int n) { return ((a * n + b) * n + c) * n + d; }

// Columns of the returned matrix are a g-orthonormal frame: E^T g E = I.
Mat orthonormal_frame(const Mat& g, int n) {
  Mat l{};  // Cholesky factor, g = L L^T
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = g[i][j];
      for (int k = 0; k < j; ++k) v -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(v > 0.0)) throw DomainError("metric is not positive definite");
        l[i][i] = std::sqrt(v);
      } else {
        l[i][j] = v / l[j][j];
      }
    }
  // E = L^{-T}: solve L^T E = I column by column
  Mat e{};
  for (int c = 0; c < n; ++c)
    for (int i = n - 1; i >= 0; --i) {
      double v = i == c ? 1.0 : 0.0;
      for (int k = i + 1; k < n; ++k) v -= l[k][i] * e[k][c];
      e[i][c] = v / l[i][i];
    }
  return e;
}

// Frobenius-orthonormal symmetric matrices: diagonal units, then scaled off-diagonal pairs.
std::vector<Mat> sym_basis(int n) {
  std::vector<Mat> out;
  for (int i = 0; i < n; ++i) {
    Mat m{};
    m[i][i] = 1.0;
    out.push_back(m);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Mat m{};
      m[i][j] = m[j][i] = std::sqrt(0.5);
      out.push_back(m);
    }
  return out;
}

// Orthonormal trace-free symmetric matrices: Helmert diagonals and off-diagonal pairs.
std::vector<Mat> trace_free_basis(int n) {
  std::vector<Mat> out;
  for (int k = 1; k < n; ++k) {
    Mat m{};
    const double c = 1.0 / std::sqrt(k * (k + 1.0));
    for (int i = 0; i < k; ++i) m[i][i] = c;
    m[k][k] = -k * c;
    out.push_back(m);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Mat m{};
      m[i][j] = m[j][i] = std::sqrt(0.5);
      out.push_back(m);
    }
  return out;
}

// Riemann tensor in an orthonormal frame.
std::array<double, 81> frame_riemann(const CurvaturePoint& p) {
  const int n = p.n;
  const Mat e = orthonormal_frame(p.g, n);
  std::array<double, 81> half{}, out{};
  // two passes of two index contractions each
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v += e[i][a] * e[j][b] * p.r[r4(i, j, k, l, n)];
          half[r4(a, b, k, l, n)] = v;
        }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) v += e[k][c] * e[l][d] * half[r4(a, b, k, l, n)];
          out[r4(a, b, c, d, n)] = v;
        }
  return out;
}

// (R h)_ab = R_{acbd} h_cd in an orthonormal frame
Mat apply_frame(const std::array<double, 81>& r, const Mat& h, int n) {
  Mat out{};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double v = 0.0;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) v += r[r4(a, c, b, d, n)] * h[c][d];
      out[a][b] = v;
    }
  return out;
}

double frobenius(const Mat& a, const Mat& b, int n) {
  double v = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v += a[i][j] * b[i][j];
  return v;
}

std::vector<double> compressed_eigenvalues(const std::array<double, 81>& r, const std::vector<Mat>& basis, int n) {
  const int m = static_cast<int>(basis.size());
  DenseMatrix mat(m);
  for (int q = 0; q < m; ++q) {
    const Mat rq = apply_frame(r, basis[q], n);
    for (int p = 0; p < m; ++p) mat(p, q) = frobenius(basis[p], rq, n);
  }
  return jacobi_eigensolve(mat).values;
}

}  // namespace

CurvaturePoint constant_curvature(int n, double kappa, const Mat& g) {
  require(n >= 1 && n <= kMaxDim, "dimension must be 1, 2 or 3");
  CurvaturePoint p{.n = n, .g = g};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) p.r[r4(a, b, c, d, n)] = kappa * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
  return p;
}

CurvaturePoint curvature_at(const GeometryCache& geo, std::size_t site) {
  const int n = geo.dim();
  CurvaturePoint p{.n = n, .g = site::load_sym(geo.metric, site)};
  for (int c = 0; c < n * n * n * n; ++c) p.r[c] = geo.riemann.at(c, site);
  return p;
}

Curv2kEigen curv2k_eigen(const CurvaturePoint& p) {
  const int n = p.n;
  const auto r = frame_riemann(p);
  Curv2kEigen out;
  out.full = compressed_eigenvalues(r, sym_basis(n), n);
  out.trace_free = n > 1 ? compressed_eigenvalues(r, trace_free_basis(n), n) : std::vector<double>{};
  Mat id{};
  for (int i = 0; i < n; ++i) id[i][i] = 1.0;
  out.pure_trace = frobenius(id, apply_frame(r, id, n), n) / n;
  return out;
}

Curv2kSpectrum curv2k_spectrum(const std::vector<CurvaturePoint>& points) {
  Curv2kSpectrum out;
  out.min_trace_free = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    out.sites.push_back(curv2k_eigen(p));
    if (!out.sites.back().trace_free.empty())
      out.min_trace_free = std::min(out.min_trace_free, out.sites.back().trace_free.front());
  }
  if (!std::isfinite(out.min_trace_free)) out.min_trace_free = 0.0;
  out.positive = out.min_trace_free > 0.0;
  return out;
}

Curv2kSpectrum curv2k_spectrum(const GeometryCache& geo, std::optional<std::size_t> site) {
  std::vector<CurvaturePoint> points;
  if (site) {
    require(*site < geo.lattice.site_count(), "site index out of range");
    points.push_back(curvature_at(geo, *site));
  } else {
    for (std::size_t s = 0; s < geo.lattice.site_count(); ++s) points.push_back(curvature_at(geo, s));
  }
  return curv2k_spectrum(points);
}

double curvature_pairing(const CurvaturePoint& p, const Mat& h) {
  const int n = p.n;
  Mat rh{};  // R_{ikjl} h^{kl} with h^{kl} raised by g
  const Mat gi = site::inverse(p.g, n);
  Mat hu{};
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) hu[k][l] += gi[k][a] * gi[l][b] * h[a][b];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) rh[i][j] += p.r[r4(i, k, j, l, n)] * hu[k][l];
  return frobenius(rh, hu, n);
}

Theorem6Report theorem6_probe(const GeometryCache& geo, const std::vector<Sym2Field>& candidates, double tol) {
  Theorem6Report rep;
  rep.nonnegative_curvature = curv2k_spectrum(geo).min_trace_free >= -tol;
  rep.consistent = true;
  const std::size_t N = geo.lattice.site_count();
  const double gg = l2_inner(geo.metric, geo.metric, geo);
  for (const auto& h : candidates) {
    check_lattice(h.lattice(), geo.lattice);
    KernelProbe k;
    const double hh = l2_inner(h, h, geo);
    require(hh > 0.0, "kernel candidate must be nonzero");
    const double hn = std::sqrt(hh);
    k.rayleigh = l2_inner(lh_apply(h, geo), h, geo) / hh;
    k.admissible = std::abs(k.rayleigh) <= tol;
    k.parallel_defect = l2_norm(covariant_derivative(h, geo), geo) / hn;
    Sym2Field rest = h;
    rest.add_scaled(-l2_inner(h, geo.metric, geo) / gg, geo.metric);
    k.proportional_defect = l2_norm(rest, geo) / hn;
    k.curvature_min = std::numeric_limits<double>::infinity();
    k.curvature_max = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < N; ++s) {
      const double v = curvature_pairing(curvature_at(geo, s), site::load_sym(h, s));
      k.curvature_min = std::min(k.curvature_min, v);
      k.curvature_max = std::max(k.curvature_max, v);
    }
    k.parallel = k.parallel_defect <= tol;
    k.proportional = k.proportional_defect <= tol;
    const double scale = std::max(1.0, h.max_abs() * h.max_abs());
    k.curvature_vanishes = std::max(std::abs(k.curvature_min), std::abs(k.curvature_max)) <= tol * scale;
    if (rep.nonnegative_curvature && k.admissible && !(k.parallel && k.curvature_vanishes)) rep.consistent = false;
    rep.candidates.push_back(k);
  }
  return rep;
}

}  // namespace hgauge
