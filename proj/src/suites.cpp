#include "harmgauge/suites.hpp"

#include <chrono>
#include <ctime>

#include "harmgauge/lattice.hpp"
#include "suite_impl.hpp"

namespace hgauge {

namespace {

using SuiteFn = void (*)(const SuiteOptions&, SuiteResult&);

void determinism(const SuiteOptions& o, SuiteResult& r);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"adjointness", suites::adjointness},
      {"theorem1", suites::theorem1},
      {"decompositions", suites::decompositions},
      {"york-relation", suites::york_relation},
      {"energy", suites::energy},
      {"gauss-bonnet", suites::gauss_bonnet},
      {"first-variation", suites::first_variation},
      {"theorem4", suites::theorem4},
      {"hessian", suites::hessian},
      {"curv2k", suites::curv2k},
      {"flow", suites::flow},
      {"determinism", determinism},
  };
  return table;
}

// Reruns deterministic suites with one and four workers and twice with four.
void determinism(const SuiteOptions& o, SuiteResult& r) {
  const int saved = worker_count();
  for (const char* name : {"adjointness", "theorem1", "decompositions", "hessian", "curv2k", "gauss-bonnet"}) {
    std::string dumps[3];
    const int workers[3] = {1, 4, 4};
    try {
      for (int k = 0; k < 3; ++k) {
        set_worker_count(workers[k]);
        dumps[k] = suites_json({run_suite(name, o)}).dump();
      }
    } catch (...) {
      set_worker_count(saved);
      throw;
    }
    auto differing = [&](const std::string& a, const std::string& b) {
      std::size_t diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
      for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) diff += a[i] != b[i];
      return static_cast<double>(diff);
    };
    r.checks.push_back(check_at_most(std::string(name) + ".workers_1_vs_4", "reports are independent of the worker count",
                                     differing(dumps[0], dumps[1]), 0.0));
    r.checks.push_back(check_at_most(std::string(name) + ".rerun", "repeated runs give identical reports",
                                     differing(dumps[1], dumps[2]), 0.0));
  }
  set_worker_count(saved);
}

}  // namespace

Check check_at_most(std::string name, std::string identity, double value, double tolerance) {
  return {std::move(name), std::move(identity), value, tolerance, "<=", value <= tolerance};
}

Check check_at_least(std::string name, std::string identity, double value, double bound) {
  return {std::move(name), std::move(identity), value, bound, ">=", value >= bound};
}

bool SuiteResult::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
  for (const auto& [n, fn] : registry()) {
    if (n != name) continue;
    SuiteResult r;
    r.suite = name;
    const auto start = std::chrono::steady_clock::now();
    fn(options, r);
    r.timings["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  throw ContractViolation("unknown suite '" + name + "'");
}

nlohmann::ordered_json check_json(const Check& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["identity"] = c.identity;
  j["value"] = c.value;
  j["tolerance"] = c.tolerance;
  j["relation"] = c.relation;
  j["passed"] = c.passed;
  return j;
}

nlohmann::ordered_json suites_json(const std::vector<SuiteResult>& results) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json s;
    s["suite"] = r.suite;
    s["passed"] = r.passed();
    s["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) s["checks"].push_back(check_json(c));
    arr.push_back(std::move(s));
  }
  return arr;
}

std::string Report::dump() const {
  nlohmann::ordered_json all = body;
  all["metadata"] = metadata;
  return all.dump(2) + "\n";
}

std::string Report::comparable() const { return body.dump(2) + "\n"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace hgauge
