#include <charconv>
#include <cmath>

#include "harmgauge/io.hpp"

namespace hgauge {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text, const std::string& separators) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (separators.find(c) != std::string::npos) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(trim(current));
  return parts;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw ParseError("bad value '" + text + "' for " + key, 0);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ParseError("bad value '" + text + "' for " + key, 0);
  }
  return v;
}

double parse_positive(const std::string& key, const std::string& text) {
  const double v = parse_number<double>(key, text);
  if (!(v > 0.0)) throw ParseError(key + " must be positive", 0);
  return v;
}

int parse_positive_int(const std::string& key, const std::string& text) {
  const int v = parse_number<int>(key, text);
  if (v < 1) throw ParseError(key + " must be at least 1", 0);
  return v;
}

}  // namespace

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> grid;
  for (const auto& part : split_list(text, "x")) grid.push_back(parse_positive_int("grid", part));
  if (grid.size() > static_cast<std::size_t>(kMaxDim)) throw ParseError("grid has more than 3 axes", 0);
  return grid;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split_list(text, ",x")) values.push_back(parse_positive("periods", part));
  return values;
}

Lattice RunConfig::lattice() const {
  std::vector<double> p = periods;
  if (p.size() == 1 && grid.size() > 1) p.assign(grid.size(), p[0]);
  if (!p.empty() && p.size() != grid.size()) throw ParseError("periods do not match the grid dimension", 0);
  return Lattice(grid, p);
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "grid") grid = parse_grid(value);
  else if (key == "periods") periods = parse_reals(value);
  else if (key == "tol") tol = parse_positive(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "max_mode") max_mode = parse_positive_int(key, value);
  else if (key == "dt") {
    dt = parse_number<double>(key, value);
    if (dt < 0.0) throw ParseError("dt must be nonnegative", 0);
  } else if (key == "steps") steps = parse_positive_int(key, value);
  else if (key == "stop_tol") stop_tol = parse_positive(key, value);
  else if (key == "amplitude") amplitude = parse_number<double>(key, value);
  else if (key == "suite") suite = value;
  else if (key == "method") {
    if (value != "berger-ebin" && value != "york" && value != "chen")
      throw ParseError("method must be berger-ebin, york or chen", 0);
    method = value;
  } else if (key == "kappa") kappa = parse_number<double>(key, value);
  else if (key == "dim") {
    dim = parse_positive_int(key, value);
    if (dim > kMaxDim) throw ParseError("dim must be 1, 2 or 3", 0);
  } else if (key == "workers") workers = parse_positive_int(key, value);
  else if (key == "out") out = value;
  else if (key == "report") report = value;
  else throw ParseError("unknown configuration key '" + key + "'", 0);
  given.insert(key);
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::string g, p;
  for (std::size_t i = 0; i < grid.size(); ++i) g += (i ? "x" : "") + std::to_string(grid[i]);
  for (std::size_t i = 0; i < periods.size(); ++i) p += (i ? "," : "") + format_real(periods[i]);
  return {{"grid", g},
          {"periods", p},
          {"tol", format_real(tol)},
          {"seed", std::to_string(seed)},
          {"max_mode", std::to_string(max_mode)},
          {"dt", format_real(dt)},
          {"steps", std::to_string(steps)},
          {"stop_tol", format_real(stop_tol)},
          {"amplitude", format_real(amplitude)},
          {"suite", suite},
          {"method", method},
          {"kappa", format_real(kappa)},
          {"dim", std::to_string(dim)}};
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (!body.empty()) {
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("expected key = value", pos);
      const std::string key = trim(std::string_view(body).substr(0, eq));
      try {
        cfg.set(key, body.substr(eq + 1));
      } catch (const ParseError& e) {
        std::string what = e.what();
        what = what.substr(0, what.rfind(" (at byte offset"));
        throw ParseError(what, pos);
      }
    }
    pos = end + 1;
  }
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) { return parse_run_config(read_bytes(path)); }

std::string flow_trace_csv(const FlowResult& result) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (std::size_t i = 0; i < result.energy.size(); ++i) {
    out += std::to_string(i) + "," + format_real(result.energy[i]) + ",";
    out += i < result.tension_norm.size() ? format_real(result.tension_norm[i]) : "";
    out += "\n";
  }
  return out;
}

}  // namespace hgauge
