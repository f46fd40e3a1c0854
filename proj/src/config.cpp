#include "dynbc/config.hpp"

#include "dynbc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dynbc {

namespace {

const std::vector<std::string> kSections{"problem", "mesh", "integrator", "study", "output"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_plain(const std::string& text, int line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) throw ConfigError("not a number: '" + text + "'", line);
    return v;
}

}  // namespace

double parse_number(const std::string& text, int line) {
    const std::string t = trim(text);
    const auto slash = t.find('/');
    if (slash == std::string::npos) return parse_plain(t, line);
    const double num = parse_plain(trim(t.substr(0, slash)), line);
    const double den = parse_plain(trim(t.substr(slash + 1)), line);
    if (den == 0.0) throw ConfigError("division by zero in '" + t + "'", line);
    return num / den;
}

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError("unterminated section header", line);
            section = trim(text.substr(1, text.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
                throw ConfigError("unknown section [" + section +
                                      "] (expected problem, mesh, integrator, study or output)",
                                  line);
            cfg.sections_[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        if (section.empty()) throw ConfigError("key outside of a section", line);
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key", line);
        auto& sec = cfg.sections_[section];
        if (sec.count(key)) throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line);
        sec[key] = {trim(text.substr(eq + 1)), line};
    }
    return cfg;
}

Config Config::parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    return parse(is);
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

int Config::line_of(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    return e ? e->line : 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return e->value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError("missing key '" + key + "' in [" + section + "]");
    return parse_number(e->value, e->line);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    const Entry* e = find(section, key);
    return e ? parse_number(e->value, e->line) : fallback;
}

std::optional<double> Config::get_optional_double(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return parse_number(e->value, e->line);
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    const double v = parse_number(e->value, e->line);
    if (v != static_cast<double>(static_cast<long long>(v)))
        throw ConfigError("'" + key + "' must be an integer", e->line);
    return static_cast<int>(v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("'" + key + "' must be true or false", e->line);
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) out.push_back(parse_number(item, e->line));
    return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(e->value)) {
        const double v = parse_number(item, e->line);
        if (v != static_cast<double>(static_cast<long long>(v)))
            throw ConfigError("'" + key + "' must list integers", e->line);
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& section, const std::string& key,
                                             const std::vector<std::string>& fallback) const {
    const Entry* e = find(section, key);
    return e ? split_list(e->value) : fallback;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = {value, 0};
}

std::vector<std::string> Config::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto s = sections_.find(section);
    if (s != sections_.end())
        for (const auto& [k, v] : s->second) out.push_back(k);
    return out;
}

std::string Config::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& [section, entries] : sections_) {
        for (const auto& [key, entry] : entries) {
            const std::string line = section + "." + key + "=" + entry.value + "\n";
            for (unsigned char c : line) {
                h ^= c;
                h *= 1099511628211ull;
            }
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace dynbc
