#pragma once
// Flat `key = value` documents, one pair per line, `#` starts a comment.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "fwdegen/model.hpp"

namespace fwdegen::config {

using KeyValues = std::map<std::string, std::string>;

/// Throws ConfigError with the line number on malformed lines or repeated keys.
KeyValues parse(const std::string& text);

/// Entries of `from` replace those of `into`.
void merge(KeyValues& into, const KeyValues& from);

/// "key=value" as given on the command line.
std::pair<std::string, std::string> parse_assignment(const std::string& s);

double to_double(const std::string& key, const std::string& value);
std::uint64_t to_uint(const std::string& key, const std::string& value);

/// Model parameters from lambda1..3, sigma0, sigma1, theta, epsilon,
/// epsilon0; missing keys keep the Params defaults. Not validated.
Params params_from(const KeyValues& kv);

}  // namespace fwdegen::config
