#include "nsbem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nsbem {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

/// Line of every "section.key" (boost's ini parser keeps no positions).
std::map<std::string, int> key_lines(const std::string& text) {
    std::map<std::string, int> lines;
    std::istringstream in(text);
    std::string raw, section;
    for (int line = 1; std::getline(in, raw); ++line) {
        const std::string s = trim(raw);
        if (s.empty() || s[0] == ';' || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) continue;
        lines.emplace(section + "." + trim(std::string_view(s).substr(0, eq)), line);
    }
    return lines;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
    RunConfig cfg;
    cfg.source_ = source;
    cfg.text_ = text;
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
    }
    const auto lines = key_lines(text);
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(fmt::format("{}: key '{}' outside any section", source, section));
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            const auto it = lines.find(name);
            std::string v = trim(value.data());
            // inline comments
            if (const auto c = v.find_first_of(";#"); c != std::string::npos) v = trim(std::string_view(v).substr(0, c));
            cfg.entries_[name] = {v, it == lines.end() ? 0 : it->second};
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str(), path.string());
}

const RunConfig::Entry& RunConfig::entry(const std::string& key) const {
    used_.insert(key);
    return entries_.at(key);
}

void RunConfig::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) throw ConfigError(fmt::format("{}: {}: {}", source_, key, message));
    throw ConfigError(fmt::format("{}:{}: {}: {}", source_, it->second.line, key, message));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? entry(key).value : fallback;
}

std::string RunConfig::require_string(const std::string& key) const {
    if (!has(key)) fail(key, "required key is missing");
    return entry(key).value;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string v = lower(entry(key).value);
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) fail(key, fmt::format("expected a number, got '{}'", entry(key).value));
    return out;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entry(key).value;
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(key, fmt::format("expected an integer, got '{}'", v));
    return out;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = lower(entry(key).value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(key, fmt::format("expected true/false, got '{}'", entry(key).value));
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    if (!has(key)) return out;
    std::string v = entry(key).value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::string item;
    while (in >> item) {
        int x = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (ec != std::errc() || ptr != item.data() + item.size())
            fail(key, fmt::format("expected a list of integers, got '{}'", item));
        out.push_back(x);
    }
    return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    std::string v = lower(entry(key).value);
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::string item;
    while (in >> item) {
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (ec != std::errc() || ptr != item.data() + item.size())
            fail(key, fmt::format("expected a list of numbers, got '{}'", item));
        out.push_back(x);
    }
    return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key.find('.') == std::string::npos) throw ConfigError(fmt::format("override key '{}' needs a section", key));
    entries_[key].value = value;
}

std::string RunConfig::canonical() const {
    std::string out, section;
    for (const auto& [key, e] : entries_) {
        const auto dot = key.find('.');
        if (key.substr(0, dot) != section) {
            section = key.substr(0, dot);
            out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", section);
        }
        out += fmt::format("{} = {}\n", key.substr(dot + 1), e.value);
    }
    return out;
}

void RunConfig::check_all_used() const {
    for (const auto& [key, e] : entries_)
        if (!used_.count(key)) fail(key, "unknown key for this command");
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunConfig::hash() const { return fmt::format("{:016x}", fnv1a(canonical())); }

std::filesystem::path preset_dir() {
    if (const char* env = std::getenv("NSBEM_PRESET_DIR"); env && *env) return env;
#ifdef NSBEM_PRESET_DIR
    return NSBEM_PRESET_DIR;
#else
    return "presets";
#endif
}

RunConfig load_preset(const std::string& name) {
    const auto path = preset_dir() / (name + ".ini");
    if (!std::filesystem::exists(path)) {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError(fmt::format("unknown preset '{}' (available: {})", name, known));
    }
    return RunConfig::load(path);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(preset_dir(), ec))
        if (e.path().extension() == ".ini") names.push_back(e.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace nsbem
