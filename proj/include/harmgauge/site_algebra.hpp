#pragma once

// Pointwise dense algebra on n x n blocks, n <= 3.

#include <array>
#include <cmath>
#include <cstddef>

#include "harmgauge/lattice.hpp"

namespace hgauge::site {

using Mat = std::array<std::array<double, kMaxDim>, kMaxDim>;
using Vec = std::array<double, kMaxDim>;

inline Mat load_sym(const Sym2Field& f, std::size_t s) {
  const int n = f.lattice().dim();
  Mat m{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m[i][j] = m[j][i] = f.at(sym_slot(i, j, n), s);
  return m;
}

inline void store_sym(Sym2Field& f, std::size_t s, const Mat& m) {
  const int n = f.lattice().dim();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) f.at(sym_slot(i, j, n), s) = m[i][j];
}

inline Vec load_vec(std::span<const double> data, std::size_t sites, int n, std::size_t s) {
  Vec v{};
  for (int i = 0; i < n; ++i) v[i] = data[i * sites + s];
  return v;
}

inline double determinant(const Mat& m, int n) {
  switch (n) {
    case 1: return m[0][0];
    case 2: return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    default:
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
}

/// Inverse by cofactors; caller guarantees det != 0.
inline Mat inverse(const Mat& m, int n) {
  Mat r{};
  const double det = determinant(m, n);
  if (n == 1) {
    r[0][0] = 1.0 / det;
  } else if (n == 2) {
    r[0][0] = m[1][1] / det;
    r[1][1] = m[0][0] / det;
    r[0][1] = -m[0][1] / det;
    r[1][0] = -m[1][0] / det;
  } else {
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  }
  return r;
}

/// Leading principal minors all positive.
inline bool is_spd(const Mat& m, int n) {
  if (!(m[0][0] > 0.0)) return false;
  if (n >= 2 && !(m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0)) return false;
  if (n >= 3 && !(determinant(m, 3) > 0.0)) return false;
  return true;
}

/// g^{ik} g^{jl} a_ij b_kl
inline double pair_sym(const Mat& ginv, const Mat& a, const Mat& b, int n) {
  // tr(G^-1 a G^-1 b)
  Mat x{}, y{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double sx = 0.0, sy = 0.0;
      for (int k = 0; k < n; ++k) {
        sx += ginv[i][k] * a[k][j];
        sy += ginv[i][k] * b[k][j];
      }
      x[i][j] = sx;
      y[i][j] = sy;
    }
  double t = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t += x[i][j] * y[j][i];
  return t;
}

inline double trace_with(const Mat& ginv, const Mat& a, int n) {
  double t = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t += ginv[i][j] * a[i][j];
  return t;
}

}  // namespace hgauge::site
