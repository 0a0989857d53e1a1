#include "harmgauge/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace hgauge {

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

Lattice::Lattice(std::vector<int> sizes, std::vector<double> periods)
    : sizes_(std::move(sizes)), periods_(std::move(periods)) {
  const int n = dim();
  if (n < 1 || n > kMaxDim) throw ContractViolation("lattice dimension must be 1, 2 or 3");
  if (periods_.empty()) periods_.assign(n, 2.0 * std::numbers::pi);
  if (static_cast<int>(periods_.size()) != n) throw ContractViolation("one period per axis required");
  for (int a = 0; a < n; ++a) {
    if (sizes_[a] < 8) throw ContractViolation("lattice needs at least 8 points per axis");
    if (sizes_[a] % 2 != 0) throw ContractViolation("lattice sizes must be even");
    if (!(periods_[a] > 0.0)) throw ContractViolation("lattice periods must be positive");
  }
  strides_.assign(n, 1);
  for (int a = n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(sizes_[a + 1]);
  count_ = strides_[0] * static_cast<std::size_t>(sizes_[0]);
}

double Lattice::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

double Lattice::volume() const noexcept {
  double v = 1.0;
  for (double p : periods_) v *= p;
  return v;
}

std::size_t Lattice::site_of(const std::array<int, kMaxDim>& index) const {
  std::size_t s = 0;
  for (int a = 0; a < dim(); ++a) {
    const int n = sizes_[a];
    s += static_cast<std::size_t>(((index[a] % n) + n) % n) * strides_[a];
  }
  return s;
}

std::size_t Lattice::neighbour(std::size_t site, int axis, int offset) const {
  const int n = sizes_[axis];
  const int i = coordinate_index(site, axis);
  const int j = ((i + offset) % n + n) % n;
  return site + static_cast<std::size_t>(j) * strides_[axis] - static_cast<std::size_t>(i) * strides_[axis];
}

int component_count(FieldKind kind, int n) {
  switch (kind) {
    case FieldKind::Scalar: return 1;
    case FieldKind::Covector:
    case FieldKind::Vector: return n;
    case FieldKind::Sym2: return sym_count(n);
    case FieldKind::Cov2: return n * n;
    case FieldKind::Sym2Grad: return n * sym_count(n);
    case FieldKind::Rank4: return n * n * n * n;
    case FieldKind::Map: return -1;
  }
  return -1;
}

const char* kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::Scalar: return "scalar";
    case FieldKind::Covector: return "covector";
    case FieldKind::Vector: return "vector";
    case FieldKind::Sym2: return "sym2";
    case FieldKind::Cov2: return "cov2";
    case FieldKind::Sym2Grad: return "sym2grad";
    case FieldKind::Rank4: return "rank4";
    case FieldKind::Map: return "map";
  }
  return "?";
}

void check_lattice(const Lattice& a, const Lattice& b) {
  if (!(a == b)) throw ContractViolation("fields live on different lattices");
}

// ---------------------------------------------------------------------------

namespace {
std::atomic<int> g_workers{1};
}

void set_worker_count(int workers) { g_workers = std::max(1, workers); }
int worker_count() noexcept { return g_workers; }

namespace {
thread_local bool t_in_parallel = false;

// Marks the calling thread as inside a parallel region for one chunk.
void run_chunk(const std::function<void(std::size_t, std::size_t)>& body, std::size_t begin, std::size_t end) {
  const bool outer = t_in_parallel;
  t_in_parallel = true;
  body(begin, end);
  t_in_parallel = outer;
}
}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(g_workers.load());
  // nested loops run serially on the calling worker
  if (workers <= 1 || count < 2 * workers || t_in_parallel) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  auto guarded = [&](std::size_t w, std::size_t begin, std::size_t end) {
    try {
      run_chunk(body, begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    if (begin < end) pool.emplace_back(guarded, w, begin, end);
  }
  guarded(0, 0, std::min(count, chunk));
  for (auto& t : pool) t.join();
  // lowest chunk first, so the surfaced error does not depend on timing
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ---------------------------------------------------------------------------

void partial_derivative(const Lattice& lattice, std::span<const double> in, std::span<double> out, int axis) {
  if (axis < 0 || axis >= lattice.dim()) throw ContractViolation("derivative axis out of range");
  require(in.size() == lattice.site_count() && out.size() == lattice.site_count(),
          "derivative arrays must span the lattice");
  const std::size_t stride = lattice.stride(axis);
  const int n = lattice.size(axis);
  const double scale = 1.0 / (12.0 * lattice.spacing(axis));
  const std::size_t rows = lattice.site_count() / stride;
  parallel_for(rows, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const std::size_t block = r / static_cast<std::size_t>(n);
      const int i = static_cast<int>(r % static_cast<std::size_t>(n));
      const std::size_t base = block * static_cast<std::size_t>(n) * stride;
      const std::size_t p1 = base + static_cast<std::size_t>((i + 1) % n) * stride;
      const std::size_t p2 = base + static_cast<std::size_t>((i + 2) % n) * stride;
      const std::size_t m1 = base + static_cast<std::size_t>((i + n - 1) % n) * stride;
      const std::size_t m2 = base + static_cast<std::size_t>((i + n - 2) % n) * stride;
      const std::size_t c = base + static_cast<std::size_t>(i) * stride;
      for (std::size_t q = 0; q < stride; ++q) {
        // differences first so equal values cancel exactly
        out[c + q] = (8.0 * (in[p1 + q] - in[m1 + q]) - (in[p2 + q] - in[m2 + q])) * scale;
      }
    }
  });
}

std::vector<double> partial_derivative(const Lattice& lattice, std::span<const double> in, int axis) {
  std::vector<double> out(lattice.site_count());
  partial_derivative(lattice, in, out, axis);
  return out;
}

ScalarField partial_derivative(const ScalarField& f, int axis) {
  ScalarField out(f.lattice());
  partial_derivative(f.lattice(), f.component(0), out.component(0), axis);
  return out;
}

double integrate(const ScalarField& f, const ScalarField& density) {
  check_lattice(f.lattice(), density.lattice());
  const std::size_t n = f.sites();
  std::vector<double> prod(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double d = density.at(0, s);
    if (!(d > 0.0)) throw DomainError("integration density must be positive (site " + std::to_string(s) + ")");
    prod[s] = f.at(0, s) * d;
  }
  return pairwise_sum(prod) * f.lattice().cell_volume();
}

double integrate(const ScalarField& f) { return pairwise_sum(f.component(0)) * f.lattice().cell_volume(); }

// ---------------------------------------------------------------------------

std::vector<ModeFunction> mode_functions(int dim, int max_mode) {
  std::vector<ModeFunction> out;
  out.push_back({});
  const int lo1 = dim > 1 ? -max_mode : 0, hi1 = dim > 1 ? max_mode : 0;
  const int lo2 = dim > 2 ? -max_mode : 0, hi2 = dim > 2 ? max_mode : 0;
  for (int k0 = 0; k0 <= max_mode; ++k0)
    for (int k1 = lo1; k1 <= hi1; ++k1)
      for (int k2 = lo2; k2 <= hi2; ++k2) {
        const std::array<int, kMaxDim> k{k0, k1, k2};
        int first = 0;
        for (int a = 0; a < kMaxDim && first == 0; ++a) first = k[a];
        if (first <= 0) continue;  // zero vector or lower half-space
        out.push_back({k, false});
        out.push_back({k, true});
      }
  return out;
}

std::vector<double> evaluate_mode(const Lattice& lattice, const ModeFunction& mode) {
  std::vector<double> v(lattice.site_count());
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t s = 0; s < v.size(); ++s) {
    double phase = 0.0;
    for (int a = 0; a < lattice.dim(); ++a)
      phase += two_pi * mode.k[a] * lattice.coordinate_index(s, a) / lattice.size(a);
    v[s] = mode.is_sine ? std::sin(phase) : std::cos(phase);
  }
  return v;
}

template <FieldKind K>
Field<K> random_band_limited(const Lattice& lattice, int max_mode, std::uint64_t seed, int components) {
  if (max_mode < 0) throw DomainError("max_mode must be nonnegative");
  for (int a = 0; a < lattice.dim(); ++a)
    if (4 * max_mode > lattice.size(a)) throw DomainError("max_mode exceeds N/4 on axis " + std::to_string(a));
  Field<K> f(lattice, components);
  const auto modes = mode_functions(lattice.dim(), max_mode);
  std::vector<std::vector<double>> values;
  values.reserve(modes.size());
  for (const auto& m : modes) values.push_back(evaluate_mode(lattice, m));
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  for (int c = 0; c < f.components(); ++c) {
    auto comp = f.component(c);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      double k2 = 0.0;
      for (int a = 0; a < kMaxDim; ++a) k2 += double(modes[m].k[a]) * modes[m].k[a];
      const double coef = uniform() / (1.0 + k2);
      for (std::size_t s = 0; s < comp.size(); ++s) comp[s] += coef * values[m][s];
    }
  }
  return f;
}

template ScalarField random_band_limited<FieldKind::Scalar>(const Lattice&, int, std::uint64_t, int);
template CovectorField random_band_limited<FieldKind::Covector>(const Lattice&, int, std::uint64_t, int);
template VectorField random_band_limited<FieldKind::Vector>(const Lattice&, int, std::uint64_t, int);
template Sym2Field random_band_limited<FieldKind::Sym2>(const Lattice&, int, std::uint64_t, int);
template MapField random_band_limited<FieldKind::Map>(const Lattice&, int, std::uint64_t, int);

}  // namespace hgauge
