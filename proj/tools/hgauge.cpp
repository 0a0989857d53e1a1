// Command-line driver: verify, decompose, flow, spectrum, curv2k, info.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "harmgauge/decompositions.hpp"
#include "harmgauge/eh_variation.hpp"
#include "harmgauge/io.hpp"
#include "harmgauge/suites.hpp"

using namespace hgauge;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Raw flag text keyed by configuration key; only flags given on the command line are applied.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<const CLI::App*, std::map<std::string, CLI::Option*>> options;
  std::string config, metric, field;
};

struct FlagInfo {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagInfo kFlags[] = {
    {"--grid", "grid", "lattice sizes, AxB[xC]"},
    {"--periods", "periods", "torus periods, comma separated (one value applies to every axis)"},
    {"--tol", "tol", "CG tolerance"},
    {"--seed", "seed", "random seed"},
    {"--max-mode", "max_mode", "largest Fourier mode of random fields and slice bases"},
    {"--dt", "dt", "flow step (0 selects h^2/4)"},
    {"--steps", "steps", "flow step budget"},
    {"--stop-tol", "stop_tol", "flow stop tolerance on sup |tau|"},
    {"--amplitude", "amplitude", "amplitude of the default initial flow displacement"},
    {"--suite", "suite", "suite name, comma-separated list, or all"},
    {"--method", "method", "berger-ebin, york or chen"},
    {"--kappa", "kappa", "sectional curvature of the synthetic model"},
    {"--dim", "dim", "dimension of the synthetic model"},
    {"--out", "out", "output directory"},
    {"--report", "report", "report path (default: stdout)"},
    {"--workers", "workers", "worker threads for site loops"},
};

void add_flags(CLI::App* sub, FlagSet& fs, const std::vector<std::string>& keys) {
  sub->add_option("--config", fs.config, "key = value configuration file");
  for (const auto& info : kFlags)
    for (const auto& k : keys)
      if (k == info.key) fs.options[sub][k] = sub->add_option(info.flag, fs.values[k], info.help);
}

RunConfig resolve(const FlagSet& fs, const CLI::App* sub) {
  RunConfig cfg = fs.config.empty() ? RunConfig{} : read_run_config(fs.config);
  for (const auto& [key, opt] : fs.options.at(sub))
    if (opt->count() > 0) cfg.set(key, fs.values.at(key));
  return cfg;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

void emit(const Report& report, const RunConfig& cfg) {
  if (cfg.report.empty()) {
    std::cout << report.dump();
  } else {
    const std::filesystem::path p(cfg.report);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_text(p, report.dump());
  }
}

Report new_report(const std::string& command) {
  Report r;
  r.body["command"] = command;
  r.metadata["timestamp"] = utc_timestamp();
  return r;
}

int finish(Report& report, const RunConfig& cfg, const json& checks) {
  bool passed = true;
  for (const auto& c : checks) passed = passed && c["passed"].get<bool>();
  report.body["checks"] = checks;
  report.body["passed"] = passed;
  emit(report, cfg);
  return passed ? kExitPass : kExitFail;
}

MetricField metric_or_flat(const std::string& path, const Lattice& lattice) {
  if (path.empty()) return MetricField::flat(lattice);
  MetricField g(field_from_rgf<FieldKind::Sym2>(rgf_read(path)));
  check_lattice(g.lattice(), lattice);
  return g;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(s.substr(pos, c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

int run_verify(const RunConfig& cfg) {
  SuiteOptions o;
  if (cfg.given.count("grid")) o.grid = cfg.grid;
  if (cfg.given.count("max_mode")) o.max_mode = cfg.max_mode;
  o.cg_tol = cfg.tol;
  o.seed = cfg.seed;
  o.stop_tol = cfg.stop_tol;
  o.steps = cfg.steps;
  o.dt = cfg.dt;
  o.kappa = cfg.kappa;
  const auto names = cfg.suite == "all" ? suite_names() : split_commas(cfg.suite);
  for (const auto& n : names)
    if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw ParseError("unknown suite '" + n + "'", 0);
  std::vector<SuiteResult> results;
  json timings = json::object();
  for (const auto& n : names) {
    results.push_back(run_suite(n, o));
    const auto& r = results.back();
    std::cerr << (r.passed() ? "PASS " : "FAIL ") << n << " (" << r.checks.size() << " checks)\n";
    for (const auto& [k, v] : r.timings) timings[n][k] = v;
  }
  Report report = new_report("verify");
  report.body["config"] = config_json(cfg);
  report.body["suites"] = suites_json(results);
  bool passed = true;
  for (const auto& r : results) passed = passed && r.passed();
  report.body["passed"] = passed;
  report.metadata["timings"] = timings;
  report.metadata["workers"] = worker_count();
  emit(report, cfg);
  return passed ? kExitPass : kExitFail;
}

int run_decompose(const RunConfig& cfg, const FlagSet& fs) {
  if (fs.field.empty()) throw ParseError("decompose needs --field", 0);
  const auto phi = field_from_rgf<FieldKind::Sym2>(rgf_read(fs.field));
  const auto geo = build_geometry(metric_or_flat(fs.metric, phi.lattice()));
  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);

  Report report = new_report("decompose");
  report.body["method"] = cfg.method;
  report.body["tol"] = cfg.tol;
  json norms = json::object(), outputs = json::array();
  auto save = [&](const std::string& name, const RgfData& d) {
    rgf_write(d, out / (name + ".rgf"));
    outputs.push_back(name + ".rgf");
  };
  Sym2Field gauge, rest;
  SolveReport solve;
  CovectorField theta;
  if (cfg.method == "chen") {
    const auto p = chen(phi, geo, cfg.tol);
    theta = p.theta, rest = p.harmonic, solve = p.solve;
    gauge = alpha_apply(p.theta, geo, OperatorMode::Adjoint);
    save("theta", to_rgf(p.theta));
    save("harmonic", to_rgf(p.harmonic));
    report.body["harmonic_defect"] = p.post_check;
  } else if (cfg.method == "york") {
    const auto p = york(phi, geo, cfg.tol);
    theta = p.theta, rest = p.transverse_traceless, solve = p.solve;
    gauge = delta_star(p.theta, geo) + times_metric(p.lambda, geo);
    save("theta", to_rgf(p.theta));
    save("lambda", to_rgf(p.lambda));
    save("transverse_traceless", to_rgf(p.transverse_traceless));
    norms["lambda"] = l2_norm(p.lambda, geo);
    report.body["outside_stated_range"] = p.outside_stated_range;
  } else {
    const auto p = berger_ebin(phi, geo, cfg.tol);
    theta = p.theta, rest = p.divergence_free, solve = p.solve;
    gauge = delta_star(p.theta, geo);
    save("theta", to_rgf(p.theta));
    save("divergence_free", to_rgf(p.divergence_free));
  }
  const double nphi = l2_norm(phi, geo), ng = l2_norm(gauge, geo), nr = l2_norm(rest, geo);
  norms["phi"] = nphi;
  norms["theta"] = l2_norm(theta, geo);
  norms["gauge"] = ng;
  norms["remainder"] = nr;
  report.body["norms"] = norms;
  report.body["solve"] = {{"iterations", solve.iterations},
                          {"final_residual", solve.final_residual},
                          {"converged", solve.converged}};
  report.body["outputs"] = outputs;
  const double scale = nphi > 0 ? nphi : 1.0;
  json checks = json::array();
  checks.push_back(check_json(check_at_most("reconstruction", "parts sum back to the input, relative",
                                            l2_norm(gauge + rest - phi, geo) / scale, 1e-7)));
  checks.push_back(check_json(check_at_most("orthogonality", "gauge part is L2-orthogonal to the remainder, relative",
                                            ng > 0 && nr > 0 ? std::abs(l2_inner(gauge, rest, geo)) / (ng * nr) : 0.0,
                                            1e-7)));
  return finish(report, cfg, checks);
}

TorusMap default_initial_map(const Lattice& lat, double amplitude) {
  TorusMap f = TorusMap::identity(lat);
  const int n = lat.dim();
  for (std::size_t s = 0; s < lat.site_count(); ++s)
    for (int a = 0; a < n; ++a) f.displacement.at(a, s) = amplitude * std::sin(lat.coordinate(s, (a + 1) % n));
  return f;
}

int run_flow(const RunConfig& cfg, const FlagSet& fs) {
  TorusMap f0 = fs.field.empty()
                    ? default_initial_map(cfg.given.count("grid") ? cfg.lattice() : Lattice({256}), cfg.amplitude)
                    : map_from_rgf(rgf_read(fs.field));
  const auto geo = build_geometry(metric_or_flat(fs.metric, f0.source));
  const auto fr = tension_flow(f0, geo, TargetMetric::flat(f0.target_dim), cfg.dt, cfg.steps, cfg.stop_tol);
  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);
  write_text(out / "trace.csv", flow_trace_csv(fr));
  rgf_write(to_rgf(fr.map), out / "final_map.rgf");

  double dt = cfg.dt;
  if (dt <= 0.0) {
    double h = std::numeric_limits<double>::infinity();
    for (int a = 0; a < f0.source.dim(); ++a) h = std::min(h, f0.source.spacing(a));
    dt = h * h / 4.0;
  }
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < fr.energy.size(); ++k)
    worst_rise = std::max(worst_rise, (fr.energy[k] - fr.energy[k - 1]) / fr.energy[k - 1]);

  Report report = new_report("flow");
  report.body["config"] = config_json(cfg);
  report.body["dt"] = dt;
  report.body["steps"] = fr.steps;
  report.body["converged"] = fr.converged;
  report.body["energy_initial"] = fr.energy.front();
  report.body["energy_final"] = fr.energy.back();
  report.body["tension_final"] = fr.tension_norm.back();
  report.body["outputs"] = json::array({"trace.csv", "final_map.rgf"});
  json checks = json::array();
  checks.push_back(check_json(check_at_most("tension.final", "flow reached the stop tolerance", fr.tension_norm.back(),
                                            cfg.stop_tol)));
  checks.push_back(check_json(check_at_most("energy.monotone", "energy never rises by more than 8 ulp relative",
                                            worst_rise, 8.0 * std::numeric_limits<double>::epsilon())));
  return finish(report, cfg, checks);
}

json eigen_json(const Curv2kEigen& e) {
  return {{"full", e.full}, {"trace_free", e.trace_free}, {"pure_trace", e.pure_trace}};
}

int run_spectrum(const RunConfig& cfg, const FlagSet& fs) {
  const Lattice lat = fs.metric.empty() ? cfg.lattice() : rgf_read(fs.metric).lattice;
  const auto geo = build_geometry(metric_or_flat(fs.metric, lat));
  const auto basis = hg_basis(geo, cfg.max_mode, cfg.tol);
  const auto rep = hessian_on_slice(geo, basis);
  Report report = new_report("spectrum");
  report.body["config"] = config_json(cfg);
  report.body["basis_size"] = rep.basis_size;
  report.body["probe_step"] = rep.t;
  report.body["fd_eigenvalues"] = rep.fd_eigenvalues;
  report.body["op_eigenvalues"] = rep.op_eigenvalues;
  report.body["fd_symmetry_defect"] = rep.fd_symmetry_defect;
  report.body["op_symmetry_defect"] = rep.op_symmetry_defect;
  report.body["discrepancy"] = rep.discrepancy;
  report.body["metric_rayleigh_fd"] = rep.metric_rayleigh_fd;
  report.body["metric_rayleigh_op"] = rep.metric_rayleigh_op;
  report.body["scaling_second_derivative"] = rep.scaling_second_derivative;
  report.body["complement_min_fd"] = rep.complement_min_fd ? json(*rep.complement_min_fd) : json(nullptr);
  report.body["complement_min_op"] = rep.complement_min_op ? json(*rep.complement_min_op) : json(nullptr);
  json checks = json::array();
  checks.push_back(check_json(check_at_most("fd_symmetry", "finite-difference Hessian is symmetric before symmetrization",
                                            rep.fd_symmetry_defect, 1e-8)));
  checks.push_back(check_json(check_at_most("op_symmetry", "operator Hessian is symmetric before symmetrization",
                                            rep.op_symmetry_defect, 1e-8)));
  return finish(report, cfg, checks);
}

int run_curv2k(const RunConfig& cfg, const FlagSet& fs) {
  Report report = new_report("curv2k");
  if (!fs.metric.empty()) {
    if (cfg.given.count("kappa") || cfg.given.count("dim"))
      throw ParseError("curv2k takes either --metric or --kappa/--dim", 0);
    const MetricField g(field_from_rgf<FieldKind::Sym2>(rgf_read(fs.metric)));
    const auto geo = build_geometry(g);
    const auto spec = curv2k_spectrum(geo);
    double max_tf = -std::numeric_limits<double>::infinity();
    for (const auto& e : spec.sites)
      for (double v : e.trace_free) max_tf = std::max(max_tf, v);
    report.body["source"] = "metric";
    report.body["sites"] = spec.sites.size();
    report.body["min_trace_free"] = spec.min_trace_free;
    report.body["max_trace_free"] = max_tf;
    report.body["positive"] = spec.positive;
    report.body["site0"] = eigen_json(spec.sites.front());
  } else {
    site::Mat id{};
    for (int a = 0; a < cfg.dim; ++a) id[a][a] = 1.0;
    const auto e = curv2k_eigen(constant_curvature(cfg.dim, cfg.kappa, id));
    const auto spec = curv2k_spectrum(std::vector<CurvaturePoint>{constant_curvature(cfg.dim, cfg.kappa, id)});
    report.body["source"] = "constant curvature model";
    report.body["kappa"] = cfg.kappa;
    report.body["dim"] = cfg.dim;
    report.body["eigenvalues"] = eigen_json(e);
    report.body["min_trace_free"] = spec.min_trace_free;
    report.body["positive"] = spec.positive;
  }
  report.body["passed"] = true;
  emit(report, cfg);
  return kExitPass;
}

int run_info(const RunConfig& cfg, const FlagSet& fs) {
  Report report = new_report("info");
  report.body["version"] = "1.0.0";
  report.body["suites"] = suite_names();
  report.body["defaults"] = config_json(RunConfig{});
  report.metadata["hardware_threads"] = std::thread::hardware_concurrency();
  if (!fs.field.empty()) {
    const auto d = rgf_read(fs.field);
    json f;
    f["kind"] = rgf_kind_name(d.kind);
    f["dim"] = d.lattice.dim();
    f["sizes"] = d.lattice.sizes();
    f["periods"] = d.lattice.periods();
    f["components"] = d.components;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : d.values) lo = std::min(lo, v), hi = std::max(hi, v);
    f["min"] = lo;
    f["max"] = hi;
    if (d.kind == RgfKind::Map) {
      f["target_dim"] = d.target_dim;
      f["winding"] = d.winding;
      f["target_periods"] = d.target_periods;
    }
    report.body["field"] = f;
  }
  emit(report, cfg);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete harmonic gauges and total scalar curvature on flat tori"};
  app.require_subcommand(1, 1);
  FlagSet fs;
  auto* verify = app.add_subcommand("verify", "run invariant suites and write a JSON report");
  add_flags(verify, fs, {"grid", "periods", "tol", "seed", "max_mode", "dt", "steps", "stop_tol", "suite", "kappa",
                         "report", "workers"});
  auto* decompose = app.add_subcommand("decompose", "split a symmetric 2-tensor field into gauge and remainder parts");
  add_flags(decompose, fs, {"method", "tol", "out", "report", "workers"});
  decompose->add_option("--field", fs.field, "sym2 RGF file to decompose")->required();
  decompose->add_option("--metric", fs.metric, "sym2 RGF metric (default: flat)");
  auto* flow = app.add_subcommand("flow", "run the tension flow and write a CSV trace");
  add_flags(flow, fs, {"grid", "periods", "dt", "steps", "stop_tol", "amplitude", "out", "report", "workers"});
  flow->add_option("--field", fs.field, "map RGF file with the initial map");
  flow->add_option("--metric", fs.metric, "sym2 RGF source metric (default: flat)");
  auto* spectrum = app.add_subcommand("spectrum", "Hessian of total scalar curvature on the harmonic slice");
  add_flags(spectrum, fs, {"grid", "periods", "tol", "max_mode", "report", "workers"});
  spectrum->add_option("--metric", fs.metric, "sym2 RGF metric (default: flat)");
  auto* curv = app.add_subcommand("curv2k", "spectrum of the curvature operator of the second kind");
  add_flags(curv, fs, {"kappa", "dim", "report"});
  curv->add_option("--metric", fs.metric, "sym2 RGF metric");
  auto* info = app.add_subcommand("info", "version, suites, defaults and RGF header summaries");
  add_flags(info, fs, {"report"});
  info->add_option("--field", fs.field, "RGF file to summarize");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig cfg = resolve(fs, app.get_subcommands().front());
    set_worker_count(cfg.workers);
    if (verify->parsed()) return run_verify(cfg);
    if (decompose->parsed()) return run_decompose(cfg, fs);
    if (flow->parsed()) return run_flow(cfg, fs);
    if (spectrum->parsed()) return run_spectrum(cfg, fs);
    if (curv->parsed()) return run_curv2k(cfg, fs);
    return run_info(cfg, fs);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const InstabilityError& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const DecompositionError& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
