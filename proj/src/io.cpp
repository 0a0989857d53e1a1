#include "harmgauge/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace hgauge {

namespace {

constexpr RgfKind kAllKinds[] = {RgfKind::Scalar, RgfKind::Covector, RgfKind::Vector, RgfKind::Sym2, RgfKind::Map};

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::optional<long long> to_integer(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_real(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

int kind_components(RgfKind kind, int n) {
  switch (kind) {
    case RgfKind::Scalar: return 1;
    case RgfKind::Covector:
    case RgfKind::Vector: return n;
    case RgfKind::Sym2: return sym_count(n);
    case RgfKind::Map: return 0;
  }
  return 0;
}

constexpr RgfKind rgf_kind_of(FieldKind k) {
  switch (k) {
    case FieldKind::Scalar: return RgfKind::Scalar;
    case FieldKind::Covector: return RgfKind::Covector;
    case FieldKind::Vector: return RgfKind::Vector;
    case FieldKind::Sym2: return RgfKind::Sym2;
    default: return RgfKind::Map;
  }
}

// One header line with its byte offset.
struct HeaderLine {
  std::size_t offset = 0;
  std::vector<std::string> words;
};

std::vector<int> integers(const HeaderLine& line, std::size_t first) {
  std::vector<int> out;
  for (std::size_t i = first; i < line.words.size(); ++i) {
    const auto v = to_integer(line.words[i]);
    if (!v || *v < 0 || *v > (1 << 24)) throw ParseError("bad integer '" + line.words[i] + "'", line.offset);
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

std::vector<int> signed_integers(const HeaderLine& line) {
  std::vector<int> out;
  for (std::size_t i = 1; i < line.words.size(); ++i) {
    const auto v = to_integer(line.words[i]);
    if (!v || std::abs(*v) > (1 << 24)) throw ParseError("bad integer '" + line.words[i] + "'", line.offset);
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

std::vector<double> reals(const HeaderLine& line) {
  std::vector<double> out;
  for (std::size_t i = 1; i < line.words.size(); ++i) {
    const auto v = to_real(line.words[i]);
    if (!v) throw ParseError("bad number '" + line.words[i] + "'", line.offset);
    out.push_back(*v);
  }
  return out;
}

}  // namespace

const char* rgf_kind_name(RgfKind kind) {
  switch (kind) {
    case RgfKind::Scalar: return "scalar";
    case RgfKind::Covector: return "covector";
    case RgfKind::Vector: return "vector";
    case RgfKind::Sym2: return "sym2";
    case RgfKind::Map: return "map";
  }
  return "?";
}

std::string format_real(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, p);
}

std::string rgf_encode(const RgfData& d) {
  const int n = d.lattice.dim();
  require(n >= 1, "rgf field needs a lattice");
  require(d.values.size() == static_cast<std::size_t>(d.components) * d.lattice.site_count(),
          "rgf value count does not match components times sites");
  std::string out = "RGF1\nkind ";
  out += rgf_kind_name(d.kind);
  out += "\ndim " + std::to_string(n) + "\nsizes";
  for (int s : d.lattice.sizes()) out += " " + std::to_string(s);
  out += "\nperiods";
  for (double p : d.lattice.periods()) out += " " + format_real(p);
  out += "\n";
  if (d.kind == RgfKind::Map) {
    require(d.target_dim == d.components, "map components must equal the target dimension");
    out += "target_dim " + std::to_string(d.target_dim) + "\n";
    for (const auto& row : d.winding) {
      require(static_cast<int>(row.size()) == n, "winding row length must equal the source dimension");
      out += "winding";
      for (int a : row) out += " " + std::to_string(a);
      out += "\n";
    }
    if (!d.target_periods.empty()) {
      out += "target_periods";
      for (double p : d.target_periods) out += " " + format_real(p);
      out += "\n";
    }
  }
  out += "DATA\n";
  const std::size_t header = out.size();
  out.resize(header + 8 * d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(d.values[i]));
    std::memcpy(out.data() + header + 8 * i, &bits, 8);
  }
  return out;
}

RgfData rgf_decode(std::string_view bytes) {
  std::vector<HeaderLine> lines;
  std::size_t pos = 0, payload = 0;
  bool terminated = false;
  while (pos < bytes.size()) {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) break;
    const std::string_view text = bytes.substr(pos, end - pos);
    if (lines.empty()) {
      if (text != "RGF1") {
        if (text.starts_with("RGF")) throw ParseError("unsupported version '" + std::string(text) + "'", pos);
        throw ParseError("bad magic", pos);
      }
      lines.push_back({pos, {"RGF1"}});
    } else if (text == "DATA") {
      terminated = true;
      payload = end + 1;
      break;
    } else {
      auto words = split_words(text);
      if (words.empty()) throw ParseError("empty header line", pos);
      lines.push_back({pos, std::move(words)});
    }
    pos = end + 1;
  }
  if (lines.empty()) {
    if (!bytes.starts_with("RGF1")) {
      if (bytes.starts_with("RGF")) throw ParseError("unsupported version", 0);
      throw ParseError("bad magic", 0);
    }
  }
  if (!terminated) throw ParseError("header not terminated by a DATA line", bytes.size());

  std::map<std::string, const HeaderLine*> keyed;
  std::vector<const HeaderLine*> winding_lines;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& key = lines[i].words[0];
    if (key == "winding") {
      winding_lines.push_back(&lines[i]);
      continue;
    }
    if (key != "kind" && key != "dim" && key != "sizes" && key != "periods" && key != "target_dim" &&
        key != "target_periods")
      throw ParseError("unknown header key '" + key + "'", lines[i].offset);
    if (!keyed.emplace(key, &lines[i]).second) throw ParseError("duplicate header key '" + key + "'", lines[i].offset);
  }
  for (const char* key : {"kind", "dim", "sizes", "periods"})
    if (!keyed.count(key)) throw ParseError(std::string("missing header key '") + key + "'", payload);

  RgfData d;
  const HeaderLine& kind_line = *keyed["kind"];
  bool known = false;
  if (kind_line.words.size() == 2)
    for (RgfKind k : kAllKinds)
      if (kind_line.words[1] == rgf_kind_name(k)) d.kind = k, known = true;
  if (!known) throw ParseError("unknown field kind", kind_line.offset);

  const HeaderLine& dim_line = *keyed["dim"];
  const auto dims = integers(dim_line, 1);
  if (dims.size() != 1 || dims[0] < 1 || dims[0] > kMaxDim) throw ParseError("dimension must be 1, 2 or 3", dim_line.offset);
  const int n = dims[0];
  const HeaderLine& sizes_line = *keyed["sizes"];
  const auto sizes = integers(sizes_line, 1);
  if (static_cast<int>(sizes.size()) != n)
    throw ParseError("dimension mismatch: " + std::to_string(sizes.size()) + " sizes for dim " + std::to_string(n),
                     sizes_line.offset);
  const HeaderLine& periods_line = *keyed["periods"];
  const auto periods = reals(periods_line);
  if (static_cast<int>(periods.size()) != n)
    throw ParseError("dimension mismatch: " + std::to_string(periods.size()) + " periods for dim " + std::to_string(n),
                     periods_line.offset);
  try {
    d.lattice = Lattice(sizes, periods);
  } catch (const Error& e) {
    throw ParseError(std::string("invalid lattice: ") + e.what(), sizes_line.offset);
  }

  if (d.kind == RgfKind::Map) {
    if (!keyed.count("target_dim")) throw ParseError("map file without target_dim", payload);
    const HeaderLine& td_line = *keyed["target_dim"];
    const auto td = integers(td_line, 1);
    if (td.size() != 1 || td[0] < 1 || td[0] > kMaxDim) throw ParseError("target_dim must be 1, 2 or 3", td_line.offset);
    d.target_dim = td[0];
    d.components = td[0];
    if (static_cast<int>(winding_lines.size()) != d.target_dim)
      throw ParseError("dimension mismatch: " + std::to_string(winding_lines.size()) + " winding rows for target_dim " +
                           std::to_string(d.target_dim),
                       td_line.offset);
    for (const HeaderLine* w : winding_lines) {
      auto row = signed_integers(*w);
      if (static_cast<int>(row.size()) != n)
        throw ParseError("dimension mismatch: winding row of length " + std::to_string(row.size()), w->offset);
      d.winding.push_back(std::move(row));
    }
    if (keyed.count("target_periods")) {
      const HeaderLine& tp_line = *keyed["target_periods"];
      d.target_periods = reals(tp_line);
      if (static_cast<int>(d.target_periods.size()) != d.target_dim)
        throw ParseError("dimension mismatch: target_periods count", tp_line.offset);
      for (double p : d.target_periods)
        if (!(p > 0.0)) throw ParseError("target periods must be positive", tp_line.offset);
    }
  } else {
    for (const char* key : {"target_dim", "target_periods"})
      if (keyed.count(key)) throw ParseError(std::string(key) + " is only valid for map files", keyed[key]->offset);
    if (!winding_lines.empty()) throw ParseError("winding is only valid for map files", winding_lines[0]->offset);
    d.components = kind_components(d.kind, n);
  }

  const std::size_t count = static_cast<std::size_t>(d.components) * d.lattice.site_count();
  const std::size_t available = bytes.size() - payload;
  if (available < 8 * count) throw ParseError("truncated payload at offset " + std::to_string(bytes.size()), bytes.size());
  if (available > 8 * count)
    throw ParseError("trailing bytes after payload at offset " + std::to_string(payload + 8 * count), payload + 8 * count);
  d.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes.data() + payload + 8 * i, 8);
    d.values[i] = std::bit_cast<double>(to_little_endian(bits));
  }
  return d;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

RgfData rgf_read(const std::filesystem::path& path) { return rgf_decode(read_bytes(path)); }

void rgf_write(const RgfData& data, const std::filesystem::path& path) { write_text(path, rgf_encode(data)); }

template <FieldKind K>
RgfData to_rgf(const Field<K>& field) {
  RgfData d;
  d.kind = rgf_kind_of(K);
  d.lattice = field.lattice();
  d.components = field.components();
  d.values.assign(field.data().begin(), field.data().end());
  return d;
}

RgfData to_rgf(const TorusMap& map) {
  map.validate();
  RgfData d;
  d.kind = RgfKind::Map;
  d.lattice = map.source;
  d.components = map.target_dim;
  d.target_dim = map.target_dim;
  d.winding = map.winding;
  d.target_periods = map.target_periods;
  d.values.assign(map.displacement.data().begin(), map.displacement.data().end());
  return d;
}

template <FieldKind K>
Field<K> field_from_rgf(const RgfData& data) {
  if (data.kind != rgf_kind_of(K))
    throw ParseError(std::string("expected a ") + rgf_kind_name(rgf_kind_of(K)) + " file, found " +
                         rgf_kind_name(data.kind),
                     0);
  Field<K> f(data.lattice);
  require(f.data().size() == data.values.size(), "rgf value count mismatch");
  std::copy(data.values.begin(), data.values.end(), f.data().begin());
  return f;
}

TorusMap map_from_rgf(const RgfData& data) {
  if (data.kind != RgfKind::Map)
    throw ParseError(std::string("expected a map file, found ") + rgf_kind_name(data.kind), 0);
  TorusMap f = TorusMap::linear(data.lattice, data.winding, data.target_periods);
  require(static_cast<std::size_t>(f.displacement.data().size()) == data.values.size(), "rgf value count mismatch");
  std::copy(data.values.begin(), data.values.end(), f.displacement.data().begin());
  f.validate();
  return f;
}

template RgfData to_rgf(const ScalarField&);
template RgfData to_rgf(const CovectorField&);
template RgfData to_rgf(const VectorField&);
template RgfData to_rgf(const Sym2Field&);
template ScalarField field_from_rgf(const RgfData&);
template CovectorField field_from_rgf(const RgfData&);
template VectorField field_from_rgf(const RgfData&);
template Sym2Field field_from_rgf(const RgfData&);

}  // namespace hgauge
