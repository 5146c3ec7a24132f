#pragma once

// CSV/JSON serialisation with schema headers, and atomic file writes.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "grid.hpp"
#include "trajectory.hpp"

namespace mfldp {

/// Shortest round-trip decimal form; identical on every run and platform
/// with a conforming std::to_chars.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw InvalidArgument(where + ": bad number \"" + s + "\"");
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidArgument("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

/// Header block shared by all CSV outputs: schema tag and one-line config.
inline std::string csv_preamble(const std::string& schema, const std::string& config_line) {
  std::string s = "# schema=" + schema + "\n";
  if (!config_line.empty()) s += "# config=" + config_line + "\n";
  return s;
}

inline std::string trajectory_csv(const Trajectory& tr, const std::string& config_line) {
  std::string s = csv_preamble("trajectory.v1", config_line);
  s += std::string("# path=") + (tr.kind == PathKind::piecewise_constant ? "piecewise_constant" : "piecewise_linear") +
       "\n";
  const std::size_t d = tr.states.empty() ? 0 : tr.states.front().size();
  s += "t";
  for (std::size_t i = 1; i <= d; ++i) s += ",x_" + std::to_string(i);
  s += "\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    s += format_double(tr.times[k]);
    for (double v : tr.states[k]) s += "," + format_double(v);
    s += "\n";
  }
  return s;
}

inline Trajectory parse_trajectory_csv(const std::string& text, const std::string& source) {
  Trajectory tr;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0, columns = 0;
  bool have_header = false, have_schema = false;
  while (std::getline(ss, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# schema=", 0) == 0) {
        if (line != "# schema=trajectory.v1") throw InvalidArgument(where + ": unsupported schema");
        have_schema = true;
      } else if (line == "# path=piecewise_constant") {
        tr.kind = PathKind::piecewise_constant;
      }
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "t") throw InvalidArgument(where + ": expected header t,x_1,...");
      columns = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != columns) throw InvalidArgument(where + ": expected " + std::to_string(columns) + " columns");
    tr.times.push_back(parse_double(cells[0], where));
    Vector x;
    for (std::size_t i = 1; i < cells.size(); ++i) x.push_back(parse_double(cells[i], where));
    tr.states.push_back(std::move(x));
  }
  if (!have_schema) throw InvalidArgument(source + ": missing \"# schema=trajectory.v1\" header");
  if (tr.times.empty()) throw InvalidArgument(source + ": no samples");
  return tr;
}

inline std::string grid_function_csv(const GridFunction& f, const std::string& config_line) {
  std::string s = csv_preamble("gridfunction.v1", config_line);
  const Grid& g = *f.grid;
  s += std::string("# domain=") + to_string(g.domain()) + " resolution=" + std::to_string(g.resolution()) + "\n";
  for (int i = 1; i <= g.dim(); ++i) s += "x_" + std::to_string(i) + ",";
  s += "value\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (double v : g.node(k)) s += format_double(v) + ",";
    s += format_double(f.values[k]) + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

using ojson = nlohmann::ordered_json;

/// Non-finite values are written as strings ("inf", "-inf", "nan"); JSON has
/// no literal for them.
inline ojson json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline ojson json_number(const ExtendedReal& v) { return v.is_infinite() ? ojson("inf") : ojson(v.value()); }

inline ojson json_array(ConstSpan v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

inline std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace mfldp
