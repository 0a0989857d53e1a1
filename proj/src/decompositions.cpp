#include "harmgauge/decompositions.hpp"

#include <cmath>
#include <limits>

namespace hgauge {

namespace {

LinearOperatorSpec<FieldKind::Covector> covector_operator(const GeometryCache& geo,
                                                          std::function<CovectorField(const CovectorField&)> apply) {
  LinearOperatorSpec<FieldKind::Covector> op;
  op.apply = std::move(apply);
  op.inner = [&geo](const CovectorField& a, const CovectorField& b) { return l2_inner(a, b, geo); };
  op.deflation_basis = covector_kernel_basis(geo);
  return op;
}

// Size of the rounding noise in a first derivative of phi.
double rounding_level(const Sym2Field& phi, const GeometryCache& geo) {
  double h = geo.lattice.spacing(0);
  for (int a = 1; a < geo.dim(); ++a) h = std::min(h, geo.lattice.spacing(a));
  return 64.0 * std::numeric_limits<double>::epsilon() * l2_norm(phi, geo) / h;
}

// The absolute floor accepts right-hand sides that are pure rounding, which can carry
// components along an exact discrete kernel that no iteration removes.
CovectorField solve_or_throw(const LinearOperatorSpec<FieldKind::Covector>& op, const CovectorField& rhs, double tol,
                             int max_iter, const char* name, SolveReport& report, double rhs_scale,
                             double rounding) {
  require(tol > 0.0, "decomposition tolerance must be positive");
  auto [x, rep] = cg_solve(op, rhs, tol, max_iter, std::max(tol * rhs_scale, rounding));
  report = rep;
  if (!rep.converged)
    throw DecompositionError(std::string(name) + ": solver did not converge (residual " +
                                 std::to_string(rep.final_residual) + " after " + std::to_string(rep.iterations) +
                                 " iterations)",
                             rep);
  return std::move(x);
}

ScalarField trace_of_killing(const CovectorField& theta, const GeometryCache& geo) {
  return trace(delta_star(theta, geo), geo);
}

// Transpose of trace_of_killing.
CovectorField trace_of_killing_adjoint(const ScalarField& lambda, const GeometryCache& geo) {
  return divergence(times_metric(lambda, geo), geo, OperatorMode::Adjoint);
}

CovectorField york_apply(const CovectorField& t, const GeometryCache& geo) {
  CovectorField r = divergence(delta_star(t, geo), geo, OperatorMode::Adjoint);
  r.add_scaled(-1.0 / geo.dim(), trace_of_killing_adjoint(trace_of_killing(t, geo), geo));
  return r;
}

}  // namespace

std::vector<CovectorField> conformal_killing_basis(const GeometryCache& geo) {
  if (geo.dim() != 2 || geo.constant_metric) return covector_kernel_basis(geo);
  // Every metric on T^2 has a two-dimensional space of conformal Killing fields.
  // Start from the lowered coordinate fields c_a and strip their range part:
  // q_a = c_a - y_a with A y_a = A c_a. Any near-null drift in y_a only moves
  // q_a further along the kernel, so a moderate tolerance suffices.
  LinearOperatorSpec<FieldKind::Covector> op;
  op.apply = [&geo](const CovectorField& t) { return york_apply(t, geo); };
  op.inner = [&geo](const CovectorField& a, const CovectorField& b) { return l2_inner(a, b, geo); };
  std::vector<CovectorField> out;
  for (int a = 0; a < 2; ++a) {
    const CovectorField c = make_field<FieldKind::Covector>(
        geo.lattice, [&](int j, std::size_t s) { return geo.metric.sym(j, a, s); });
    auto [y, rep] = cg_solve(op, op.apply(c), 1e-8, kDefaultMaxIterations);
    out.push_back(c - y);
  }
  return out;
}

std::vector<CovectorField> covector_kernel_basis(const GeometryCache& geo) {
  std::vector<CovectorField> out;
  if (!geo.constant_metric) return out;
  const Lattice& lat = geo.lattice;
  const int n = lat.dim();
  for (int c = 0; c < n; ++c)
    for (int mask = 0; mask < (1 << n); ++mask)
      out.push_back(make_field<FieldKind::Covector>(lat, [&](int comp, std::size_t s) {
        if (comp != c) return 0.0;
        int parity = 0;
        for (int a = 0; a < n; ++a)
          if (mask & (1 << a)) parity += lat.coordinate_index(s, a);
        return parity % 2 ? -1.0 : 1.0;
      }));
  return out;
}

BergerEbinParts berger_ebin(const Sym2Field& phi, const GeometryCache& geo, double tol, int max_iter) {
  check_lattice(phi.lattice(), geo.lattice);
  const auto op = covector_operator(geo, [&geo](const CovectorField& t) {
    return divergence(delta_star(t, geo), geo, OperatorMode::Adjoint);
  });
  const CovectorField rhs = divergence(phi, geo, OperatorMode::Adjoint);
  BergerEbinParts out;
  out.theta = solve_or_throw(op, rhs, tol, max_iter, "berger-ebin", out.solve, l2_norm(rhs, geo),
                             rounding_level(phi, geo));
  out.divergence_free = phi - delta_star(out.theta, geo);
  return out;
}

YorkParts york(const Sym2Field& phi, const GeometryCache& geo, double tol, int max_iter) {
  check_lattice(phi.lattice(), geo.lattice);
  const double inv_n = 1.0 / geo.dim();
  auto op = covector_operator(geo, [&geo](const CovectorField& t) { return york_apply(t, geo); });
  if (geo.dim() == 2 && !geo.constant_metric) op.deflation_basis = conformal_killing_basis(geo);
  const ScalarField tr = trace(phi, geo);
  CovectorField rhs = divergence(phi, geo, OperatorMode::Adjoint);
  const CovectorField trace_term = trace_of_killing_adjoint(tr, geo);
  const double scale = l2_norm(rhs, geo) + inv_n * l2_norm(trace_term, geo);
  rhs.add_scaled(-inv_n, trace_term);

  YorkParts out;
  out.outside_stated_range = geo.dim() < 3;
  out.theta = solve_or_throw(op, rhs, tol, max_iter, "york", out.solve, scale, rounding_level(phi, geo));
  const Sym2Field ds = delta_star(out.theta, geo);
  out.lambda = tr - trace(ds, geo);
  out.lambda *= inv_n;
  out.transverse_traceless = phi - ds - times_metric(out.lambda, geo);
  return out;
}

ChenParts chen(const Sym2Field& phi, const GeometryCache& geo, double tol, int max_iter) {
  check_lattice(phi.lattice(), geo.lattice);
  const auto op = covector_operator(geo, [&geo](const CovectorField& t) {
    return alpha_star_apply(alpha_apply(t, geo, OperatorMode::Adjoint), geo, OperatorMode::Adjoint);
  });
  const CovectorField rhs = alpha_star_apply(phi, geo, OperatorMode::Adjoint);
  const double scale = l2_norm(divergence(phi, geo, OperatorMode::Adjoint), geo) +
                       0.5 * l2_norm(exterior_derivative(trace(phi, geo)), geo);
  ChenParts out;
  out.theta = solve_or_throw(op, rhs, tol, max_iter, "chen", out.solve, scale, rounding_level(phi, geo));
  out.harmonic = phi - alpha_apply(out.theta, geo, OperatorMode::Adjoint);

  out.post_check = l2_norm(alpha_star_apply(out.harmonic, geo, OperatorMode::Adjoint), geo);
  const double bound = 10.0 * tol * std::max(l2_norm(rhs, geo), scale) + 1e-14 * l2_norm(phi, geo);
  if (out.post_check > bound)
    throw DecompositionError("chen: harmonic part fails the slice condition (" + std::to_string(out.post_check) +
                                 " > " + std::to_string(bound) + ")",
                             out.solve);
  return out;
}

std::vector<Sym2Field> hg_basis(const GeometryCache& geo, int max_mode, double tol) {
  const Lattice& lat = geo.lattice;
  for (int a = 0; a < lat.dim(); ++a)
    if (max_mode < 0 || max_mode > lat.size(a) / 4)
      throw DomainError("max_mode " + std::to_string(max_mode) + " is not resolvable on this lattice");

  std::vector<Sym2Field> basis;
  auto append = [&](Sym2Field v) {
    const double n0 = l2_norm(v, geo);
    if (!(n0 > 0.0)) return;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v.add_scaled(-l2_inner(b, v, geo), b);
    const double nv = l2_norm(v, geo);
    if (nv < std::sqrt(tol) * n0) return;
    v *= 1.0 / nv;
    basis.push_back(std::move(v));
  };

  append(geo.metric);
  const int nsym = sym_count(lat.dim());
  for (const auto& mode : mode_functions(lat.dim(), max_mode)) {
    const auto values = evaluate_mode(lat, mode);
    for (int slot = 0; slot < nsym; ++slot) {
      Sym2Field e(lat);
      auto comp = e.component(slot);
      std::copy(values.begin(), values.end(), comp.begin());
      const Sym2Field projected = chen(e, geo, tol).harmonic;
      if (l2_norm(projected, geo) < tol * l2_norm(e, geo)) continue;
      append(projected);
    }
  }
  if (basis.empty()) throw Error("harmonic slice basis is empty");
  return basis;
}

double ihp_residual(const CovectorField& theta, const GeometryCache& geo) {
  const double num = rms_norm(sampson_laplacian(theta, geo), geo);
  return num / std::max(rms_norm(theta, geo), 1.0);
}

}  // namespace hgauge
