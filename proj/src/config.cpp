#include "fwdegen/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "fwdegen/errors.hpp"

namespace fwdegen::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(no) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("line " + std::to_string(no) + ": repeated key " + key);
  }
  return kv;
}

void merge(KeyValues& into, const KeyValues& from) {
  for (const auto& [k, v] : from) into[k] = v;
}

std::pair<std::string, std::string> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + s + "'");
  auto key = trim(s.substr(0, eq));
  if (key.empty()) throw ConfigError("empty key in '" + s + "'");
  return {key, trim(s.substr(eq + 1))};
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  if (value.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": not a number: '" + value + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  if (value.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": not a nonnegative integer: '" + value + "'");
  }
  return v;
}

Params params_from(const KeyValues& kv) {
  Params p;
  auto take = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = to_double(key, it->second);
  };
  take("lambda1", p.lambda1);
  take("lambda2", p.lambda2);
  take("lambda3", p.lambda3);
  take("sigma0", p.sigma0);
  take("sigma1", p.sigma1);
  take("theta", p.theta);
  take("epsilon", p.epsilon);
  take("epsilon0", p.epsilon0);
  return p;
}

}  // namespace fwdegen::config
