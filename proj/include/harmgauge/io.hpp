#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "harmgauge/harmonic_maps.hpp"
#include "harmgauge/lattice.hpp"

namespace hgauge {

// ---------------------------------------------------------------------------
// RGF field files: ASCII header terminated by a "DATA" line, then little-endian
// f64 values, component-major, exactly components * sites values.

enum class RgfKind { Scalar, Covector, Vector, Sym2, Map };

const char* rgf_kind_name(RgfKind kind);

struct RgfData {
  RgfKind kind = RgfKind::Scalar;
  Lattice lattice;
  int components = 0;
  std::vector<double> values;
  // Map files only.
  int target_dim = 0;
  std::vector<std::vector<int>> winding;  ///< target_dim rows of dim entries
  std::vector<double> target_periods;     ///< optional on read, defaults to 2 pi

  bool operator==(const RgfData& other) const = default;
};

/// Canonical byte encoding; decoding then encoding a canonical file reproduces it.
std::string rgf_encode(const RgfData& data);
/// Throws ParseError with the byte offset of the offending header line or payload end.
RgfData rgf_decode(std::string_view bytes);

RgfData rgf_read(const std::filesystem::path& path);
void rgf_write(const RgfData& data, const std::filesystem::path& path);

template <FieldKind K>
RgfData to_rgf(const Field<K>& field);
RgfData to_rgf(const TorusMap& map);

/// Throws ParseError (offset 0) when the file holds a different kind.
template <FieldKind K>
Field<K> field_from_rgf(const RgfData& data);
TorusMap map_from_rgf(const RgfData& data);

// ---------------------------------------------------------------------------
// Run configuration: "key = value" lines, '#' starts a comment.

struct RunConfig {
  std::vector<int> grid{32, 32};
  std::vector<double> periods;      ///< empty: 2 pi on every axis
  double tol = 1e-10;               ///< CG tolerance
  std::uint64_t seed = 1;
  int max_mode = 1;
  double dt = 0.0;                  ///< flow step, 0 selects h^2 / 4
  int steps = 100000;               ///< flow step budget
  double stop_tol = 1e-7;           ///< flow stop tolerance on sup |tau|
  double amplitude = 0.3;           ///< flow initial displacement amplitude
  std::string suite = "all";
  std::string method = "chen";
  double kappa = 1.0;
  int dim = 3;
  int workers = 1;
  std::string out = ".";
  std::string report;               ///< empty: stdout
  std::set<std::string> given;      ///< keys set explicitly

  Lattice lattice() const;
  /// Throws ParseError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Offsets in errors are byte offsets into text.
RunConfig parse_run_config(std::string_view text);
RunConfig read_run_config(const std::filesystem::path& path);

std::vector<int> parse_grid(const std::string& text);
std::vector<double> parse_reals(const std::string& text);

// ---------------------------------------------------------------------------
// Flow traces.

inline constexpr const char* kTraceHeader = "step,energy,tension_inf_norm";

std::string flow_trace_csv(const FlowResult& result);

/// Shortest round-trip decimal form.
std::string format_real(double value);

/// Writes the whole string, throwing Error on failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_bytes(const std::filesystem::path& path);

}  // namespace hgauge
