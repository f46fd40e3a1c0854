#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dynbc {

/// Flat INI configuration: `[section]` headers and `key = value` lines.
/// `#` and `;` start comments. Keys outside a section are rejected, as are
/// sections other than problem, mesh, integrator, study and output.
class Config {
public:
    static Config parse(std::istream& is);
    static Config parse_string(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::optional<double> get_optional_double(const std::string& section, const std::string& key) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    /// Whitespace or comma separated numbers; fractions like 1/160 are accepted.
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key,
                              const std::vector<int>& fallback) const;
    std::vector<std::string> get_strings(const std::string& section, const std::string& key,
                                         const std::vector<std::string>& fallback) const;

    /// Line on which a key was defined (0 when absent).
    int line_of(const std::string& section, const std::string& key) const;

    /// Sets or overrides a value (line 0).
    void set(const std::string& section, const std::string& key, const std::string& value);

    /// FNV-1a 64-bit hash of the sorted `section.key=value` lines, as 16 hex digits.
    std::string hash() const;

    /// Keys present in a section, sorted.
    std::vector<std::string> keys(const std::string& section) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry* find(const std::string& section, const std::string& key) const;
};

/// Parses a number, allowing a fraction a/b. Throws ConfigError with `line`.
double parse_number(const std::string& text, int line);

}  // namespace dynbc
