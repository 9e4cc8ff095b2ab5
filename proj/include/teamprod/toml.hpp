#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

namespace teamprod {

// Reads the TOML subset used by configuration files into a JSON object:
// [table] and [a.b] headers, bare or quoted keys (dotted keys allowed),
// basic and literal strings, integers, floats (incl. inf/nan), booleans,
// single-line arrays of those, inline comments. Throws ConfigError with the
// source and line on anything else, and on duplicate keys.
nlohmann::json parse_toml(std::string_view text, const std::string& source = "<config>");

}  // namespace teamprod
