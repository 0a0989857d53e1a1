// Acceptance run: one PASS/FAIL line per criterion, failing checks listed beneath.

#include <cstdio>
#include <string>
#include <vector>

#include "harmgauge/lattice.hpp"
#include "harmgauge/suites.hpp"

using namespace hgauge;

namespace {

struct Criterion {
  int number;
  const char* suite;
  const char* summary;
};

constexpr Criterion kCriteria[] = {
    {1, "adjointness", "adjoint-mode transposes to 1e-12, analytic-mode defect order >= 3.5 (32^2 -> 64^2, 3 seeds)"},
    {2, "theorem1", "pullback divergence identity: order >= 3.5 for band-limited maps, exact for linear/constant maps"},
    {3, "decompositions", "Berger-Ebin, York, Chen on 48^2: reconstruction, orthogonality 1e-7; Pythagoras, "
                          "idempotence 1e-6"},
    {4, "york-relation", "York relation: linear maps 1e-8, flowed surface map within 10x the stop tolerance"},
    {5, "energy", "identity energy n/2 Vol to 1e-12, constant map energy exactly 0"},
    {6, "gauss-bonnet", "total scalar curvature of conformal T^2 metrics <= 1e-5 at 64^2, order >= 3.5 or rounding"},
    {7, "first-variation", "extrapolated first variation equals minus the Einstein pairing to 1e-6, scaling to 1e-10"},
    {8, "theorem4", "Einstein/Ricci pairing gap equals half the Scal tr h integral to 1e-10, zero when flat"},
    {9, "hessian", "Hessian symmetry 1e-8, flat Fourier oracle 1e-5, metric Rayleigh 1e-6, re-mixing 1e-8"},
    {10, "curv2k", "constant curvature: trace-free eigenvalues kappa, pure trace (n-1) kappa, to 1e-12"},
    {11, "flow", "circle flow: monotone energy, sup tau <= 1e-6 within 1e5 steps, limit within 1e-5 of linear, 60 s"},
};

void print_failures(const SuiteResult& r) {
  for (const auto& c : r.checks)
    if (!c.passed)
      std::printf("    failed %s: %.6g %s %.6g (%s)\n", c.name.c_str(), c.value, c.relation.c_str(), c.tolerance,
                  c.identity.c_str());
}

}  // namespace

int main() {
  const SuiteOptions options;
  int failed = 0;
  std::vector<SuiteResult> serial;
  set_worker_count(1);
  for (const auto& c : kCriteria) {
    SuiteResult r = run_suite(c.suite, options);
    std::printf("%s criterion %d: %s [%zu checks, %.1f s]\n", r.passed() ? "PASS" : "FAIL", c.number, c.summary,
                r.checks.size(), r.timings["seconds"]);
    print_failures(r);
    std::fflush(stdout);
    failed += !r.passed();
    serial.push_back(std::move(r));
  }

  // Criterion 12: every suite again with four workers, then once more, compared byte for byte.
  std::vector<std::string> mismatched;
  for (int pass = 0; pass < 2; ++pass) {
    set_worker_count(4);
    for (const auto& r : serial) {
      const std::string a = suites_json({r}).dump(2);
      const std::string b = suites_json({run_suite(r.suite, options)}).dump(2);
      if (a != b) mismatched.push_back(r.suite + (pass ? " (second rerun)" : " (4 workers)"));
    }
    if (pass == 0 && !mismatched.empty()) break;
  }
  set_worker_count(1);
  std::printf("%s criterion 12: reports byte-identical across worker counts 1 and 4 and across reruns\n",
              mismatched.empty() ? "PASS" : "FAIL");
  for (const auto& m : mismatched) std::printf("    differs: %s\n", m.c_str());
  failed += !mismatched.empty();

  std::printf("%d of 12 criteria failed\n", failed);
  return failed ? 1 : 0;
}
