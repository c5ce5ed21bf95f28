#include "fwdegen/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fwdegen/errors.hpp"

namespace fwdegen::io {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trajectory_table(const Trajectory& t) {
  std::string out = "t,x,y\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_number(t.times[i]);
    out += ',';
    out += format_number(t.states[i].x);
    out += ',';
    out += format_number(t.states[i].y);
    out += '\n';
  }
  return out;
}

std::string scalar_path_table(const ScalarPath& p) {
  std::string out = "t,w\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += format_number(p.times[i]) + ',' + format_number(p.values[i]) + '\n';
  }
  return out;
}

std::string occupation_table(const OccupationHistogram& h) {
  std::string out = "region,time,fraction\n";
  for (std::size_t r = 0; r < h.regions.size(); ++r) {
    out += h.regions[r] + ',' + format_number(h.time(r)) + ',' + format_number(h.fraction(r)) + '\n';
  }
  return out;
}

std::string cost_table(const CostMatrix& cm, const std::vector<double>& disagreement) {
  std::string out = ",K1,K2,K3";
  if (!disagreement.empty()) out += ",disagreement";
  out += '\n';
  for (int i = 1; i <= 3; ++i) {
    out += "K" + std::to_string(i);
    for (int j = 1; j <= 3; ++j) out += ',' + format_number(cm(i, j));
    if (!disagreement.empty()) out += ',' + format_number(disagreement.at(static_cast<std::size_t>(i - 1)));
    out += '\n';
  }
  return out;
}

std::string well_cost_table(const WellCosts& w) {
  std::string out = "well,W,argmin\n";
  for (int i = 1; i <= 3; ++i) {
    bool in = false;
    for (int a : w.argmin) in = in || a == i;
    out += "K" + std::to_string(i) + ',' + format_number(w(i)) + ',' + (in ? "1" : "0") + '\n';
  }
  return out;
}

std::string record_text(const Record& r) {
  std::string out;
  for (const auto& [k, v] : r) out += k + " = " + v + '\n';
  return out;
}

namespace {

double parse_field(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad number on line " + std::to_string(line) + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

ScalarPath parse_scalar_path(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  ScalarPath p;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "t,w") throw ConfigError("path table must start with header 't,w'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("missing ',' on line " + std::to_string(no));
    std::string_view sv(line);
    p.times.push_back(parse_field(sv.substr(0, comma), no));
    p.values.push_back(parse_field(sv.substr(comma + 1), no));
  }
  if (!header) throw ConfigError("empty path table");
  check_path(p);
  return p;
}

}  // namespace fwdegen::io
