#pragma once

#include <cmath>
#include <vector>

#include "harmgauge/eh_variation.hpp"
#include "harmgauge/harmonic_maps.hpp"
#include "harmgauge/suites.hpp"

namespace hgauge::suites {

void adjointness(const SuiteOptions& o, SuiteResult& r);
void theorem1(const SuiteOptions& o, SuiteResult& r);
void decompositions(const SuiteOptions& o, SuiteResult& r);
void york_relation(const SuiteOptions& o, SuiteResult& r);
void energy(const SuiteOptions& o, SuiteResult& r);
void flow(const SuiteOptions& o, SuiteResult& r);
void gauss_bonnet(const SuiteOptions& o, SuiteResult& r);
void first_variation(const SuiteOptions& o, SuiteResult& r);
void theorem4(const SuiteOptions& o, SuiteResult& r);
void hessian(const SuiteOptions& o, SuiteResult& r);
void curv2k(const SuiteOptions& o, SuiteResult& r);

inline double refinement_order(double coarse, double fine) { return std::log2(coarse / fine); }

inline Lattice grid_or(const SuiteOptions& o, std::vector<int> fallback) {
  return Lattice(o.grid.value_or(std::move(fallback)));
}

/// Same lattice with every size doubled.
inline Lattice refined(const Lattice& lat) {
  std::vector<int> sizes = lat.sizes();
  for (int& s : sizes) s *= 2;
  return Lattice(sizes, lat.periods());
}

}  // namespace hgauge::suites
