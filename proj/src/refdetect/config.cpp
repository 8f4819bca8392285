#include "blocktrace/refdetect.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace blocktrace::refdetect {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_fraction(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size() || v < 0.0 || v > 1.0) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number in [0,1], got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || v == 0) {
        throw ConfigError(key + ": expected a positive integer, got '" + value + "'");
    }
    return v;
}

}  // namespace

Config parse_config(std::string_view text) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key == "class_member_overlap") c.class_member_overlap = parse_fraction(key, value);
        else if (key == "method_match_score") c.method_match_score = parse_fraction(key, value);
        else if (key == "fragment_coverage") c.fragment_coverage = parse_fraction(key, value);
        else if (key == "prune_identical_methods") c.prune_identical_methods = parse_bool(key, value);
        else if (key == "deprecated_method_pattern") c.deprecated_method_pattern = value;
        else if (key == "deprecated_type_pattern") c.deprecated_type_pattern = value;
        else if (key == "same_type_pattern") c.same_type_pattern = value;
        else if (key == "instantiation_pattern") c.instantiation_pattern = value;
        else if (key == "subtype_pattern") c.subtype_pattern = value;
        else if (key == "caller_pattern") c.caller_pattern = value;
        else if (key == "size_limit") c.mapper.size_limit = parse_count(key, value);
        else if (key == "search_budget") c.mapper.search_budget = static_cast<int>(parse_count(key, value));
        else throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace blocktrace::refdetect
