#pragma once

// Shared helpers for the unit tests. Nothing here calls into the code under
// test beyond field construction.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "harmgauge/lattice.hpp"

namespace hgtest {

using hgauge::FieldKind;
using hgauge::Lattice;

inline constexpr double kPi = std::numbers::pi;

using Point = std::array<double, 3>;

inline Point point(const Lattice& lat, std::size_t s) {
  Point p{};
  for (int a = 0; a < lat.dim(); ++a) p[a] = lat.coordinate(s, a);
  return p;
}

template <FieldKind K>
hgauge::Field<K> field_from(const Lattice& lat, const std::function<double(int, const Point&)>& fn, int comps = -1) {
  return hgauge::make_field<K>(lat, [&](int c, std::size_t s) { return fn(c, point(lat, s)); }, comps);
}

inline hgauge::ScalarField scalar_from(const Lattice& lat, const std::function<double(const Point&)>& fn) {
  return field_from<FieldKind::Scalar>(lat, [&](int, const Point& p) { return fn(p); });
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <FieldKind K>
double max_abs_diff(const hgauge::Field<K>& a, const hgauge::Field<K>& b) {
  return max_abs_diff(a.data(), b.data());
}

inline double order(double coarse, double fine) { return std::log2(coarse / fine); }

inline Lattice torus(std::vector<int> sizes) { return Lattice(std::move(sizes)); }

}  // namespace hgtest
