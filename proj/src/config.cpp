#include "episim/config.hpp"

#include "episim/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace epi {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

NodeAddress node_value(const std::string& key, const std::string& v) {
  auto n = parse_node(v);
  if (!n)
    invalid("bad coordinate for '" + key + "': " + v);
  return *n;
}

std::uint64_t uint_value(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || d < 0 || d != double(std::uint64_t(d)))
      invalid("expected a non-negative integer for '" + key + "': " + v);
    return std::uint64_t(d);
  } catch (const std::logic_error&) {
    invalid("expected a number for '" + key + "': " + v);
  }
}

double real_value(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size())
      invalid("expected a number for '" + key + "': " + v);
    return d;
  } catch (const std::logic_error&) {
    invalid("expected a number for '" + key + "': " + v);
  }
}

std::string node_text(NodeAddress n) {
  return std::to_string(n.row) + "," + std::to_string(n.col);
}

} // namespace

std::uint64_t WindowConfig::byte_offset(std::uint32_t raw) const {
  const GlobalAddress a = decode_address(raw);
  const std::uint64_t block = std::uint64_t(a.node.row - first.row) * width() + (a.node.col - first.col);
  return (block << kOffsetBits) | a.offset;
}

NodeAddress PlatformConfig::origin() const {
  NodeAddress o{63, 63};
  for (const auto& c : chips) {
    o.row = std::min(o.row, c.origin.row);
    o.col = std::min(o.col, c.origin.col);
  }
  return chips.empty() ? NodeAddress{} : o;
}

unsigned PlatformConfig::rows() const {
  unsigned end = 0;
  for (const auto& c : chips)
    end = std::max(end, c.origin.row + c.rows);
  return chips.empty() ? 0 : end - origin().row;
}

unsigned PlatformConfig::cols() const {
  unsigned end = 0;
  for (const auto& c : chips)
    end = std::max(end, c.origin.col + c.cols);
  return chips.empty() ? 0 : end - origin().col;
}

unsigned PlatformConfig::core_count() const {
  unsigned n = 0;
  for (const auto& c : chips)
    n += c.rows * c.cols;
  return n;
}

std::optional<unsigned> PlatformConfig::chip_of(NodeAddress n) const {
  for (unsigned i = 0; i < chips.size(); ++i)
    if (chips[i].contains(n))
      return i;
  return std::nullopt;
}

std::optional<unsigned> PlatformConfig::window_of(NodeAddress n) const {
  for (unsigned i = 0; i < windows.size(); ++i)
    if (windows[i].contains(n))
      return i;
  return std::nullopt;
}

std::vector<NodeAddress> PlatformConfig::cores() const {
  std::vector<NodeAddress> out;
  const NodeAddress o = origin();
  for (unsigned r = 0; r < rows(); ++r)
    for (unsigned c = 0; c < cols(); ++c) {
      NodeAddress n{std::uint8_t(o.row + r), std::uint8_t(o.col + c)};
      if (is_core(n))
        out.push_back(n);
    }
  return out;
}

std::vector<NodeAddress> PlatformConfig::group_of(NodeAddress n) const {
  if (work_groups.empty())
    return cores();
  for (const auto& g : work_groups)
    if (std::find(g.begin(), g.end(), n) != g.end())
      return g;
  return {n};
}

void PlatformConfig::validate() const {
  if (chips.empty())
    invalid("no chips declared");
  for (const auto& c : chips) {
    if (c.rows == 0 || c.cols == 0)
      invalid("chip at " + to_string(c.origin) + " has an empty grid");
    if (c.origin.row + c.rows > kMeshDim || c.origin.col + c.cols > kMeshDim)
      invalid("chip at " + to_string(c.origin) + " (" + std::to_string(c.rows) + "x" +
              std::to_string(c.cols) + ") exceeds the 64x64 coordinate space");
  }
  unsigned area = 0;
  for (std::size_t i = 0; i < chips.size(); ++i) {
    area += chips[i].rows * chips[i].cols;
    for (std::size_t j = i + 1; j < chips.size(); ++j) {
      const auto& a = chips[i];
      const auto& b = chips[j];
      const bool disjoint = a.origin.row + a.rows <= b.origin.row || b.origin.row + b.rows <= a.origin.row ||
                            a.origin.col + a.cols <= b.origin.col || b.origin.col + b.cols <= a.origin.col;
      if (!disjoint)
        invalid("chips at " + to_string(a.origin) + " and " + to_string(b.origin) + " overlap");
    }
  }
  if (area != rows() * cols())
    invalid("chips must tile a rectangle");
  if (core_mem_bytes == 0 || core_mem_bytes > kNodeSpan || core_mem_bytes % 8 != 0)
    invalid("core_mem_bytes must be a multiple of 8 in (0, 1 MiB]");
  if (!(clock_hz > 0))
    invalid("clock_hz must be positive");
  if (!(elink_bytes_per_cycle >= 0))
    invalid("elink_bytes_per_cycle must be non-negative");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.first.row > w.last.row || w.first.col > w.last.col)
      invalid("window '" + w.name + "' has first > last");
    if (w.size == 0 || w.size > (std::uint64_t(w.width()) * w.height() << kOffsetBits))
      invalid("window '" + w.name + "' size does not fit its coordinate rectangle");
    for (unsigned r = w.first.row; r <= w.last.row; ++r)
      for (unsigned c = w.first.col; c <= w.last.col; ++c)
        if (is_core({std::uint8_t(r), std::uint8_t(c)}))
          invalid("window '" + w.name + "' overlaps core coordinates");
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const auto& v = windows[j];
      const bool disjoint = w.last.row < v.first.row || v.last.row < w.first.row ||
                            w.last.col < v.first.col || v.last.col < w.first.col;
      if (!disjoint)
        invalid("windows '" + w.name + "' and '" + v.name + "' overlap");
    }
  }
  std::set<NodeAddress> seen;
  for (const auto& g : work_groups) {
    if (g.empty())
      invalid("empty work group");
    for (auto n : g) {
      if (!is_core(n))
        invalid("work group member " + to_string(n) + " is not a core");
      if (!seen.insert(n).second)
        invalid("core " + to_string(n) + " belongs to two work groups");
    }
  }
}

PlatformConfig PlatformConfig::single_chip(std::string name, NodeAddress origin, unsigned rows,
                                           unsigned cols) {
  PlatformConfig c;
  c.name = std::move(name);
  c.chips.push_back({origin, rows, cols});
  return c;
}

PlatformConfig PlatformConfig::preset(const std::string& name) {
  if (name == "parallella") {
    auto c = single_chip("parallella", {32, 8}, 4, 4);
    c.clock_hz = 600e6;
    // 32 MiB from 0x8e000000: blocks (35,32) through (35,63).
    c.windows.push_back({"shared", {35, 32}, {35, 63}, 32ull << 20});
    return c;
  }
  if (name == "e16") {
    auto c = single_chip("e16", {32, 8}, 4, 4);
    c.clock_hz = 600e6;
    return c;
  }
  if (name == "e64") {
    auto c = single_chip("e64", {32, 8}, 8, 8);
    c.clock_hz = 800e6;
    return c;
  }
  invalid("unknown preset '" + name + "'");
}

PlatformConfig PlatformConfig::parse(const std::string& text) {
  PlatformConfig c;
  c.name = "custom";
  std::istringstream in(text);
  std::string line;
  std::string section;
  bool have_format = false;
  std::optional<NodeAddress> top_origin;
  std::optional<unsigned> top_rows, top_cols;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        invalid("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "chip")
        c.chips.push_back({});
      else if (section == "window")
        c.windows.push_back({});
      else if (section == "group")
        c.work_groups.push_back({});
      else
        invalid("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      invalid("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      if (key == "format") {
        if (value != kConfigFormat)
          invalid("unsupported format '" + value + "'");
        have_format = true;
      } else if (key == "name") c.name = value;
      else if (key == "clock_hz") c.clock_hz = real_value(key, value);
      else if (key == "core_mem_bytes") c.core_mem_bytes = std::uint32_t(uint_value(key, value));
      else if (key == "elink_bytes_per_cycle") c.elink_bytes_per_cycle = real_value(key, value);
      else if (key == "origin") top_origin = node_value(key, value);
      else if (key == "rows") top_rows = unsigned(uint_value(key, value));
      else if (key == "cols") top_cols = unsigned(uint_value(key, value));
      else invalid("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } else if (section == "chip") {
      auto& chip = c.chips.back();
      if (key == "origin") chip.origin = node_value(key, value);
      else if (key == "rows") chip.rows = unsigned(uint_value(key, value));
      else if (key == "cols") chip.cols = unsigned(uint_value(key, value));
      else invalid("line " + std::to_string(lineno) + ": unknown chip key '" + key + "'");
    } else if (section == "window") {
      auto& w = c.windows.back();
      if (key == "name") w.name = value;
      else if (key == "first") w.first = node_value(key, value);
      else if (key == "last") w.last = node_value(key, value);
      else if (key == "size") w.size = uint_value(key, value);
      else invalid("line " + std::to_string(lineno) + ": unknown window key '" + key + "'");
    } else if (section == "group") {
      if (key != "cores")
        invalid("line " + std::to_string(lineno) + ": unknown group key '" + key + "'");
      std::istringstream members(value);
      std::string tok;
      while (members >> tok)
        c.work_groups.back().push_back(node_value(key, tok));
    }
  }
  if (!have_format)
    invalid(std::string("missing 'format = ") + kConfigFormat + "'");
  if (top_origin || top_rows || top_cols) {
    if (!c.chips.empty())
      invalid("use either top-level origin/rows/cols or [chip] sections, not both");
    c.chips.push_back({top_origin.value_or(NodeAddress{}), top_rows.value_or(4), top_cols.value_or(4)});
  }
  c.validate();
  return c;
}

PlatformConfig PlatformConfig::load(const std::string& path_or_preset) {
  if (path_or_preset == "parallella" || path_or_preset == "e16" || path_or_preset == "e64")
    return preset(path_or_preset);
  std::ifstream f(path_or_preset);
  if (!f)
    invalid("cannot open config file '" + path_or_preset + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string PlatformConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "format = " << kConfigFormat << "\n";
  out << "name = " << name << "\n";
  out << "clock_hz = " << clock_hz << "\n";
  out << "core_mem_bytes = " << core_mem_bytes << "\n";
  out << "elink_bytes_per_cycle = " << elink_bytes_per_cycle << "\n";
  for (const auto& chip : chips)
    out << "\n[chip]\norigin = " << node_text(chip.origin) << "\nrows = " << chip.rows
        << "\ncols = " << chip.cols << "\n";
  for (const auto& w : windows)
    out << "\n[window]\nname = " << w.name << "\nfirst = " << node_text(w.first)
        << "\nlast = " << node_text(w.last) << "\nsize = " << w.size << "\n";
  for (const auto& g : work_groups) {
    out << "\n[group]\ncores =";
    for (auto n : g)
      out << " " << node_text(n);
    out << "\n";
  }
  return out.str();
}

} // namespace epi
