#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "harmgauge/error.hpp"

namespace hgauge {

inline constexpr int kMaxDim = 3;

/// Periodic uniform lattice over the n-torus. Sites are indexed row-major,
/// axis 0 slowest.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(std::vector<int> sizes, std::vector<double> periods = {});

  int dim() const noexcept { return static_cast<int>(sizes_.size()); }
  int size(int axis) const { return sizes_.at(axis); }
  double period(int axis) const { return periods_.at(axis); }
  double spacing(int axis) const { return periods_.at(axis) / sizes_.at(axis); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  const std::vector<double>& periods() const noexcept { return periods_; }

  std::size_t site_count() const noexcept { return count_; }
  std::size_t stride(int axis) const { return strides_.at(axis); }
  double cell_volume() const noexcept;
  double volume() const noexcept;

  int coordinate_index(std::size_t site, int axis) const {
    return static_cast<int>((site / strides_[axis]) % static_cast<std::size_t>(sizes_[axis]));
  }
  double coordinate(std::size_t site, int axis) const { return coordinate_index(site, axis) * spacing(axis); }
  std::size_t site_of(const std::array<int, kMaxDim>& index) const;

  /// Periodic neighbour `offset` steps along `axis`.
  std::size_t neighbour(std::size_t site, int axis, int offset) const;

  bool operator==(const Lattice& other) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<double> periods_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// Shape tags for component arrays over a lattice.
///  Cov2     : general (0,2) tensor, component i*n + j
///  Sym2Grad : T_{k(ij)} symmetric in the last pair, component k*nsym + slot(i,j)
///  Rank4    : full (0,4) tensor, component ((a*n+b)*n+c)*n+d
///  Map      : runtime component count (target dimension)
enum class FieldKind { Scalar, Covector, Vector, Sym2, Cov2, Sym2Grad, Rank4, Map };

constexpr int sym_count(int n) noexcept { return n * (n + 1) / 2; }

/// Upper-triangle slot of (i, j); symmetric in its arguments.
constexpr int sym_slot(int i, int j, int n) noexcept {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i * n - i * (i - 1) / 2 + (j - i);
}

int component_count(FieldKind kind, int n);
const char* kind_name(FieldKind kind);

/// Component-major storage: component c occupies [c*N, (c+1)*N).
template <FieldKind K>
class Field {
 public:
  static constexpr FieldKind kind = K;

  Field() = default;
  explicit Field(Lattice lattice) : Field(std::move(lattice), -1) {}
  Field(Lattice lattice, int components) : lattice_(std::move(lattice)) {
    components_ = components < 0 ? component_count(K, lattice_.dim()) : components;
    require(components_ >= 1, "field needs at least one component");
    data_.assign(static_cast<std::size_t>(components_) * lattice_.site_count(), 0.0);
  }

  const Lattice& lattice() const noexcept { return lattice_; }
  int components() const noexcept { return components_; }
  std::size_t sites() const noexcept { return lattice_.site_count(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> component(int c) const { return {data_.data() + offset(c), sites()}; }
  std::span<double> component(int c) { return {data_.data() + offset(c), sites()}; }

  double at(int c, std::size_t site) const { return data_[offset(c) + site]; }
  double& at(int c, std::size_t site) { return data_[offset(c) + site]; }

  /// Symmetric access; only meaningful for Sym2.
  double sym(int i, int j, std::size_t site) const { return at(sym_slot(i, j, lattice_.dim()), site); }
  double& sym(int i, int j, std::size_t site) { return at(sym_slot(i, j, lattice_.dim()), site); }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  /// this += a * x
  Field& add_scaled(double a, const Field& x) {
    check_same(x);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = v < 0 ? (-v > m ? -v : m) : (v > m ? v : m);
    return m;
  }

  void check_same(const Field& o) const {
    if (!(lattice_ == o.lattice_) || components_ != o.components_)
      throw ContractViolation("field shape or lattice mismatch");
  }

 private:
  std::size_t offset(int c) const { return static_cast<std::size_t>(c) * lattice_.site_count(); }

  Lattice lattice_;
  int components_ = 0;
  std::vector<double> data_;
};

using ScalarField = Field<FieldKind::Scalar>;
using CovectorField = Field<FieldKind::Covector>;
using VectorField = Field<FieldKind::Vector>;
using Sym2Field = Field<FieldKind::Sym2>;
using Cov2Field = Field<FieldKind::Cov2>;
using Sym2GradField = Field<FieldKind::Sym2Grad>;
using Rank4Field = Field<FieldKind::Rank4>;
using MapField = Field<FieldKind::Map>;

void check_lattice(const Lattice& a, const Lattice& b);

// ---------------------------------------------------------------------------
// Site-parallel execution and deterministic reductions.

/// Number of worker threads used by site loops (default 1). Results never
/// depend on this value.
void set_worker_count(int workers);
int worker_count() noexcept;

/// Runs body(begin, end) over disjoint chunks of [0, count).
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

/// Fixed pairwise-tree summation.
double pairwise_sum(std::span<const double> values);

// ---------------------------------------------------------------------------
// Differentiation and quadrature.

/// Fourth-order central difference along `axis`, periodic wraparound.
void partial_derivative(const Lattice& lattice, std::span<const double> in, std::span<double> out, int axis);
std::vector<double> partial_derivative(const Lattice& lattice, std::span<const double> in, int axis);
ScalarField partial_derivative(const ScalarField& f, int axis);

/// sum_s f_s * density_s * cell volume; density must be positive.
double integrate(const ScalarField& f, const ScalarField& density);

/// Plain-sum integral with unit density.
double integrate(const ScalarField& f);

// ---------------------------------------------------------------------------
// Field construction.

/// Pseudo-random trigonometric polynomial per component with modes |k_a| <= max_mode.
/// Coefficients decay like 1/(1+|k|^2) and lie in [-1, 1] before decay.
template <FieldKind K>
Field<K> random_band_limited(const Lattice& lattice, int max_mode, std::uint64_t seed, int components = -1);

/// Real Fourier mode functions cos(k.x), sin(k.x) over half-space wavevectors
/// with |k_a| <= max_mode; the constant mode comes first.
struct ModeFunction {
  std::array<int, kMaxDim> k{};
  bool is_sine = false;
};
std::vector<ModeFunction> mode_functions(int dim, int max_mode);
std::vector<double> evaluate_mode(const Lattice& lattice, const ModeFunction& mode);

/// Fill every component from fn(component, site).
template <FieldKind K>
Field<K> make_field(const Lattice& lattice, const std::function<double(int, std::size_t)>& fn, int components = -1) {
  Field<K> f(lattice, components);
  for (int c = 0; c < f.components(); ++c)
    for (std::size_t s = 0; s < f.sites(); ++s) f.at(c, s) = fn(c, s);
  return f;
}

}  // namespace hgauge
