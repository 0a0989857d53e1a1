#include "harmgauge/harmonic_maps.hpp"

#include <cmath>
#include <numbers>

namespace hgauge {

using site::Mat;
using site::Vec;

// ---------------------------------------------------------------------------
// TorusMap

TorusMap TorusMap::linear(const Lattice& source, std::vector<std::vector<int>> winding,
                          std::vector<double> target_periods) {
  TorusMap f;
  f.source = source;
  f.target_dim = static_cast<int>(winding.size());
  if (target_periods.empty()) target_periods.assign(f.target_dim, 2.0 * std::numbers::pi);
  f.target_periods = std::move(target_periods);
  f.winding = std::move(winding);
  f.displacement = MapField(source, std::max(f.target_dim, 1));
  f.validate();
  return f;
}

TorusMap TorusMap::identity(const Lattice& source) {
  std::vector<std::vector<int>> a(source.dim(), std::vector<int>(source.dim(), 0));
  for (int i = 0; i < source.dim(); ++i) a[i][i] = 1;
  return linear(source, a, source.periods());
}

TorusMap TorusMap::constant(const Lattice& source, const std::vector<double>& y) {
  TorusMap f = linear(source, std::vector<std::vector<int>>(y.size(), std::vector<int>(source.dim(), 0)));
  for (int a = 0; a < f.target_dim; ++a)
    for (double& v : f.displacement.component(a)) v = y[a];
  return f;
}

double TorusMap::slope(int a, int i) const { return winding[a][i] * target_periods[a] / source.period(i); }

double TorusMap::value(int a, std::size_t site) const {
  double v = displacement.at(a, site);
  for (int i = 0; i < source.dim(); ++i) v += slope(a, i) * source.coordinate(site, i);
  return v;
}

void TorusMap::validate() const {
  if (target_dim < 1 || target_dim > kMaxDim) throw ContractViolation("target dimension must be 1, 2 or 3");
  if (static_cast<int>(winding.size()) != target_dim) throw ContractViolation("winding matrix needs one row per target axis");
  for (const auto& row : winding)
    if (static_cast<int>(row.size()) != source.dim()) throw ContractViolation("winding row length must equal source dimension");
  if (static_cast<int>(target_periods.size()) != target_dim) throw ContractViolation("one target period per target axis");
  for (double p : target_periods)
    if (!(p > 0.0)) throw ContractViolation("target periods must be positive");
  if (!(displacement.lattice() == source) || displacement.components() != target_dim)
    throw ContractViolation("displacement must live on the source lattice with target_dim components");
}

// ---------------------------------------------------------------------------
// TargetMetric

TargetMetric TargetMetric::constant(const Mat& g, int dim) {
  require(dim >= 1 && dim <= kMaxDim, "target dimension must be 1, 2 or 3");
  if (!site::is_spd(g, dim)) throw DomainError("constant target metric is not positive definite");
  TargetMetric t;
  t.dim_ = dim;
  t.constant_ = true;
  t.metric_ = [g](const Vec&) { return g; };
  t.christoffel_ = [](const Vec&) { return std::array<Mat, 3>{}; };
  return t;
}

TargetMetric TargetMetric::flat(int dim) {
  Mat id{};
  for (int a = 0; a < dim; ++a) id[a][a] = 1.0;
  return constant(id, dim);
}

TargetMetric TargetMetric::general(int dim, MetricFn metric, ChristoffelFn christoffel) {
  require(dim >= 1 && dim <= kMaxDim, "target dimension must be 1, 2 or 3");
  TargetMetric t;
  t.dim_ = dim;
  t.constant_ = false;
  t.metric_ = std::move(metric);
  t.christoffel_ = std::move(christoffel);
  return t;
}

TargetMetric TargetMetric::conformal(int dim, std::function<double(const Vec&)> w,
                                     std::function<Vec(const Vec&)> grad_w) {
  require(dim >= 1 && dim <= kMaxDim, "target dimension must be 1, 2 or 3");
  TargetMetric t;
  t.dim_ = dim;
  t.constant_ = false;
  t.metric_ = [dim, w](const Vec& y) {
    Mat g{};
    const double e = std::exp(2.0 * w(y));
    for (int a = 0; a < dim; ++a) g[a][a] = e;
    return g;
  };
  // Gammabar^a_bc = delta_ab dw_c + delta_ac dw_b - delta_bc dw_a
  t.christoffel_ = [dim, grad_w](const Vec& y) {
    const Vec dw = grad_w(y);
    std::array<Mat, 3> gam{};
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c)
          gam[a][b][c] = (a == b) * dw[c] + (a == c) * dw[b] - (b == c) * dw[a];
    return gam;
  };
  return t;
}

TargetMetric TargetMetric::conformal_sine(int dim, double amplitude) {
  auto w = [dim, amplitude](const Vec& y) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += std::sin(y[a] + a);
    return amplitude * s;
  };
  auto grad = [dim, amplitude](const Vec& y) {
    Vec d{};
    for (int a = 0; a < dim; ++a) d[a] = amplitude * std::cos(y[a] + a);
    return d;
  };
  return conformal(dim, w, grad);
}

Mat TargetMetric::metric(const Vec& y) const {
  const Mat g = metric_(y);
  if (!constant_ && !site::is_spd(g, dim_)) throw DomainError("target metric is not positive definite at a hit point");
  return g;
}

std::array<Mat, 3> TargetMetric::christoffel(const Vec& y) const { return christoffel_(y); }

// ---------------------------------------------------------------------------

namespace {

void check_target(const TorusMap& f, const TargetMetric& target) {
  f.validate();
  if (target.dim() != f.target_dim) throw ContractViolation("target metric dimension does not match the map");
}

Vec point(const TorusMap& f, std::size_t s) {
  Vec y{};
  for (int a = 0; a < f.target_dim; ++a) y[a] = f.value(a, s);
  return y;
}

}  // namespace

MapField map_differential(const TorusMap& f) {
  f.validate();
  const int n = f.source.dim(), m = f.target_dim;
  MapField df(f.source, m * n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) {
      partial_derivative(f.source, f.displacement.component(a), df.component(a * n + i), i);
      const double b = f.slope(a, i);
      if (b != 0.0)
        for (double& v : df.component(a * n + i)) v += b;
    }
  return df;
}

Sym2Field pullback_metric(const TorusMap& f, const TargetMetric& target) {
  check_target(f, target);
  const int n = f.source.dim(), m = f.target_dim;
  const MapField df = map_differential(f);
  Sym2Field out(f.source);
  for (std::size_t s = 0; s < f.source.site_count(); ++s) {
    const Mat g = target.metric(point(f, s));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) v += g[a][b] * df.at(a * n + i, s) * df.at(b * n + j, s);
        out.sym(i, j, s) = v;
      }
  }
  return out;
}

EnergyResult energy(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target) {
  check_lattice(f.source, geo.lattice);
  EnergyResult out{.density = trace(pullback_metric(f, target), geo)};
  out.total = 0.5 * integrate(out.density, geo.density);
  return out;
}

MapField tension(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target) {
  check_target(f, target);
  check_lattice(f.source, geo.lattice);
  const Lattice& lat = f.source;
  const int n = lat.dim(), m = f.target_dim;
  const std::size_t N = lat.site_count();
  const MapField df = map_differential(f);

  // ddu[(a*n + i)*n + j] = d_j d_i u^a; the linear part has no second derivative
  std::vector<std::vector<double>> ddu(static_cast<std::size_t>(m * n * n));
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) {
      std::vector<double> du = partial_derivative(lat, f.displacement.component(a), i);
      for (int j = 0; j < n; ++j) ddu[(a * n + i) * n + j] = partial_derivative(lat, du, j);
    }

  MapField tau(lat, m);
  parallel_for(N, [&](std::size_t s0, std::size_t s1) {
    for (std::size_t s = s0; s < s1; ++s) {
      const std::array<Mat, 3> gb = target.is_constant() ? std::array<Mat, 3>{} : target.christoffel(point(f, s));
      for (int a = 0; a < m; ++a) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double x = 0.5 * (ddu[(a * n + i) * n + j][s] + ddu[(a * n + j) * n + i][s]);
            if (!geo.constant_metric)
              for (int k = 0; k < n; ++k) x -= geo.gamma(k, i, j, s) * df.at(a * n + k, s);
            if (!target.is_constant())
              for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c) x += gb[a][b][c] * df.at(b * n + i, s) * df.at(c * n + j, s);
            v += geo.inverse.sym(i, j, s) * x;
          }
        tau.at(a, s) = v;
      }
    }
  });
  return tau;
}

Theorem1Residual theorem1_residual(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target) {
  const Sym2Field gstar = pullback_metric(f, target);
  const ScalarField e = trace(gstar, geo);
  const MapField tau = tension(f, geo, target);
  const MapField df = map_differential(f);
  const int n = f.source.dim(), m = f.target_dim;

  Theorem1Residual out{.residual = divergence(gstar, geo, OperatorMode::Analytic)};
  out.residual.add_scaled(0.5, exterior_derivative(e));
  for (std::size_t s = 0; s < f.source.site_count(); ++s) {
    const Mat g = target.metric(point(f, s));
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) v += g[a][b] * tau.at(a, s) * df.at(b * n + j, s);
      out.residual.at(j, s) += v;
    }
  }
  out.norm = l2_norm(out.residual, geo);
  return out;
}

FlowResult tension_flow(const TorusMap& f0, const GeometryCache& geo, const TargetMetric& target, double dt,
                        int steps, double stop_tol) {
  check_target(f0, target);
  require(steps >= 0, "step budget must be nonnegative");
  if (dt <= 0.0) {
    double h = f0.source.spacing(0);
    for (int a = 1; a < f0.source.dim(); ++a) h = std::min(h, f0.source.spacing(a));
    dt = 0.25 * h * h;
  }
  FlowResult out;
  out.map = f0;
  double e = energy(out.map, geo, target).total;
  for (;;) {
    const MapField tau = tension(out.map, geo, target);
    const double tn = tau.max_abs();
    out.energy.push_back(e);
    out.tension_norm.push_back(tn);
    if (tn <= stop_tol) {
      out.converged = true;
      break;
    }
    if (out.steps >= steps) break;
    out.map.displacement.add_scaled(dt, tau);
    ++out.steps;
    const double e_new = energy(out.map, geo, target).total;
    if (e_new - e > 1e-12 * std::abs(e))
      throw InstabilityError("energy increased from " + std::to_string(e) + " to " + std::to_string(e_new) +
                             " at step " + std::to_string(out.steps) + "; reduce dt");
    e = e_new;
  }
  return out;
}

Corollary1Report corollary1_check(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target, double tol,
                                  double cg_tol) {
  Corollary1Report rep;
  rep.tension_norm = tension(f, geo, target).max_abs();
  if (rep.tension_norm > tol)
    throw DomainError("map is not harmonic to tolerance (sup |tau| = " + std::to_string(rep.tension_norm) + ")");

  const Sym2Field gstar = pullback_metric(f, target);
  const auto parts = berger_ebin(gstar, geo, cg_tol);
  rep.ihp_residual = ihp_residual(parts.theta, geo);
  rep.ihp = rep.ihp_residual <= tol;

  // With delta theta = -div theta, harmonicity and an infinitesimal harmonic
  // transformation give d(e + delta theta) = 0.
  ScalarField s = trace(gstar, geo);
  s += divergence(parts.theta, geo, OperatorMode::Analytic);
  const double vol = integrate(geo.density);
  rep.constant = integrate(s, geo.density) / vol;
  for (double v : s.component(0)) rep.deviation = std::max(rep.deviation, std::abs(v - rep.constant));
  rep.energy = 0.5 * integrate(trace(gstar, geo), geo.density);
  rep.c_vol = rep.constant * vol;
  rep.half_c_vol = 0.5 * rep.constant * vol;
  rep.passed = rep.ihp && rep.deviation <= 10.0 * tol * std::max(1.0, std::abs(rep.constant));
  return rep;
}

YorkRelationReport york_relation(const TorusMap& f, const GeometryCache& geo, const TargetMetric& target,
                                 double cg_tol) {
  const auto parts = york(pullback_metric(f, target), geo, cg_tol);
  const CovectorField ds = sampson_laplacian(parts.theta, geo);
  const CovectorField dl = exterior_derivative(parts.lambda);
  CovectorField r = ds;
  r.add_scaled(geo.dim() - 2.0, dl);
  return {.sampson_norm = rms_norm(ds, geo),
          .dlambda_norm = rms_norm(dl, geo),
          .residual = rms_norm(r, geo),
          .outside_stated_range = parts.outside_stated_range};
}

}  // namespace hgauge
