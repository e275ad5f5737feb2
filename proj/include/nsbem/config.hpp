#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nsbem {

/// Unreadable or invalid configuration. The message names the file, line and key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sectioned key/value configuration (INI syntax). Keys are addressed as
/// "section.key". Every getter marks its key as used; check_all_used() then
/// rejects keys no command consumed (typos).
class RunConfig {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static RunConfig parse(const std::string& text, const std::string& source = "<string>");
    static RunConfig load(const std::filesystem::path& path);

    const std::string& source() const { return source_; }
    const std::string& text() const { return text_; }
    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key) const;  // comma or space separated
    std::vector<double> get_double_list(const std::string& key) const;

    /// Overrides or adds a value.
    void set(const std::string& key, const std::string& value);

    /// ConfigError for a key at its line: "source:line: key: message".
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;
    void check_all_used() const;

    /// Sorted "key = value" form, one section block each; comments and
    /// layout of the source are dropped.
    std::string canonical() const;
    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;

private:
    const Entry& entry(const std::string& key) const;

    std::string source_;
    std::string text_;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

std::uint64_t fnv1a(std::string_view data);

/// Directory of the shipped presets (compile-time default, overridable with
/// the NSBEM_PRESET_DIR environment variable).
std::filesystem::path preset_dir();
RunConfig load_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace nsbem
