#include "superrad/kvfile.hpp"

#include <cmath>

namespace superrad::kv {

std::map<std::string, std::string> parse(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) +
                              ": empty key or value");
        if (out.count(key)) throw ConfigError("duplicate key '" + key + "'");
        out[key] = val;
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': bad numeric value '" + value + "'");
    }
}

long to_long(const std::string& key, const std::string& value) {
    const double x = to_double(key, value);
    if (x != std::floor(x))
        throw ConfigError("key '" + key + "': expected integer, got '" + value +
                          "'");
    return static_cast<long>(x);
}

int to_int(const std::string& key, const std::string& value) {
    return static_cast<int>(to_long(key, value));
}

} // namespace superrad::kv
