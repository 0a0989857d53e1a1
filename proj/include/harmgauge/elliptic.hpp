#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <functional>
#include <utility>
#include <vector>

#include "harmgauge/lattice.hpp"

namespace hgauge {

/// Self-adjoint operator on fields of one kind, with its inner product and an
/// optional (approximate) kernel to deflate.
template <FieldKind K>
struct LinearOperatorSpec {
  std::function<Field<K>(const Field<K>&)> apply;
  std::function<double(const Field<K>&, const Field<K>&)> inner;
  std::vector<Field<K>> deflation_basis;
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  ///< ||r|| / ||b||, b the deflated right-hand side
  double rhs_norm = 0.0;
  std::vector<double> deflated_components;
  std::vector<double> residual_history;  ///< relative, starts with 1
  bool converged = false;
  bool breakdown = false;  ///< a search direction hit a (near-)null curvature
  double adjointness_defect = 0.0;
  double min_curvature = HUGE_VAL;  ///< smallest <p,Ap>/<p,p> seen; small values flag a near-kernel
};

/// Relative defect |<Ax,y> - <x,Ay>| / (||Ax|| ||y||) measured on two probes.
template <FieldKind K>
double adjointness_probe(const LinearOperatorSpec<K>& op, const Field<K>& like) {
  const Lattice& lat = like.lattice();
  int mode = lat.size(0) / 4;
  for (int a = 0; a < lat.dim(); ++a) mode = std::min(mode, lat.size(a) / 4);
  mode = std::min(mode, 2);
  const auto x = random_band_limited<K>(lat, mode, 0x5eed01, like.components());
  const auto y = random_band_limited<K>(lat, mode, 0x5eed02, like.components());
  const auto ax = op.apply(x);
  const auto ay = op.apply(y);
  const double lhs = op.inner(ax, y), rhs = op.inner(x, ay);
  const double scale = std::sqrt(std::max(op.inner(ax, ax), 0.0) * std::max(op.inner(y, y), 0.0)) +
                       std::sqrt(std::max(op.inner(ay, ay), 0.0) * std::max(op.inner(x, x), 0.0));
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

/// Deflated conjugate gradients with minimal-residual smoothing of the iterates
/// (the reported residual sequence is nonincreasing). Returns the solution in the
/// orthogonal complement of the deflation span. Converged means
/// ||r|| <= max(tol ||b||, absolute_floor); the floor lets callers whose
/// right-hand side is a cancelling difference accept rounding-level residuals.
template <FieldKind K>
std::pair<Field<K>, SolveReport> cg_solve(const LinearOperatorSpec<K>& op, const Field<K>& rhs, double tol,
                                          int max_iter, double absolute_floor = 0.0) {
  require(tol > 0.0, "cg tolerance must be positive");
  SolveReport rep;
  rep.adjointness_defect = adjointness_probe(op, rhs);
  if (rep.adjointness_defect > 1e-10)
    throw ContractViolation("operator failed the self-adjointness probe (defect " +
                            std::to_string(rep.adjointness_defect) + ")");

  // Orthonormalize the deflation basis (twice-iterated Gram-Schmidt).
  std::vector<Field<K>> q;
  for (const auto& v : op.deflation_basis) {
    Field<K> w = v;
    const double n0 = std::sqrt(op.inner(w, w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) w.add_scaled(-op.inner(u, w), u);
    const double nw = std::sqrt(std::max(op.inner(w, w), 0.0));
    if (n0 > 0.0 && nw > 1e-10 * n0) {
      w *= 1.0 / nw;
      q.push_back(std::move(w));
    }
  }
  auto project = [&](Field<K>& v) {
    for (const auto& u : q) v.add_scaled(-op.inner(u, v), u);
  };

  Field<K> b = rhs;
  for (const auto& u : q) {
    const double c = op.inner(u, b);
    rep.deflated_components.push_back(c);
    b.add_scaled(-c, u);
  }
  Field<K> x(rhs.lattice(), rhs.components());
  const double bnorm = std::sqrt(std::max(op.inner(b, b), 0.0));
  rep.rhs_norm = bnorm;
  rep.residual_history.push_back(bnorm > 0.0 ? 1.0 : 0.0);
  if (bnorm == 0.0) {
    rep.converged = true;
    return {std::move(x), rep};
  }

  const double target = std::max(tol, absolute_floor / bnorm);
  Field<K> y = x;
  auto true_residual = [&](const Field<K>& v) {
    Field<K> res = b - op.apply(v);
    project(res);
    return res;
  };
  Field<K> r = b;
  for (int restart = 0; restart < 4; ++restart) {
    // CG on A e = r, accumulated into y
    Field<K> xk = y, p = r, sres = r, ys = y;
    double rr = op.inner(r, r);
    double snorm2 = rr;
    bool stop = false;
    while (rep.iterations < max_iter) {
      Field<K> ap = op.apply(p);
      project(ap);
      const double pap = op.inner(p, ap);
      const double pp = op.inner(p, p);
      if (!(pap > 0.0)) {
        rep.breakdown = true;
        stop = true;
        break;
      }
      rep.min_curvature = std::min(rep.min_curvature, pap / pp);
      const double alpha = rr / pap;
      xk.add_scaled(alpha, p);
      r.add_scaled(-alpha, ap);
      const double rr_new = op.inner(r, r);

      // minimal-residual smoothing
      Field<K> d = r - sres;
      const double dd = op.inner(d, d);
      if (dd > 0.0) {
        const double eta = -op.inner(sres, d) / dd;
        sres.add_scaled(eta, d);
        Field<K> dx = xk - ys;
        ys.add_scaled(eta, dx);
        snorm2 = op.inner(sres, sres);
      }
      ++rep.iterations;
      const double rel = std::sqrt(std::max(snorm2, 0.0)) / bnorm;
      rep.residual_history.push_back(std::min(rel, rep.residual_history.back()));
      if (rel <= 0.5 * target) break;
      p *= rr_new / rr;
      p += r;
      rr = rr_new;
    }
    y = std::move(ys);
    project(y);
    r = true_residual(y);
    rep.final_residual = std::sqrt(std::max(op.inner(r, r), 0.0)) / bnorm;
    if (stop || rep.final_residual <= target || rep.iterations >= max_iter) break;
  }
  rep.converged = rep.final_residual <= target;
  return {std::move(y), rep};
}

/// Dense row-major square matrix.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  static DenseMatrix identity(int size);
  double frobenius() const;
};

DenseMatrix multiply(const DenseMatrix& x, const DenseMatrix& y);
DenseMatrix transpose(const DenseMatrix& x);

/// max |A - A^T| / max |A| (0 for the zero matrix).
double symmetry_defect(const DenseMatrix& m);

struct EigenDecomposition {
  std::vector<double> values;  ///< ascending
  DenseMatrix vectors;         ///< column j is the eigenvector of values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on the symmetrized input.
EigenDecomposition jacobi_eigensolve(const DenseMatrix& m);

}  // namespace hgauge
