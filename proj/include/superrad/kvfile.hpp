// "key = value" config-file scanner shared by the parameter and experiment
// config formats.  '#' starts a comment; keys are unique.
#pragma once

#include <istream>
#include <map>
#include <string>

#include "superrad/types.hpp"

namespace superrad::kv {

std::map<std::string, std::string> parse(std::istream& in);
double to_double(const std::string& key, const std::string& value);
long to_long(const std::string& key, const std::string& value);
int to_int(const std::string& key, const std::string& value);

} // namespace superrad::kv
