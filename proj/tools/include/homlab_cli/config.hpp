#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace homlab::cli {

// Malformed or inconsistent configuration; maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` text. Keys are dotted (`grid.n`); `[section]` headers
// prefix the keys that follow them; `#` starts a comment.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "<string>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) const;

    // Keys not in `known`; reported by name so a typo is caught.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& expected) const;

    std::map<std::string, std::string> values_;
    std::string source_;
};

std::vector<std::string> split_list(const std::string& s);

}  // namespace homlab::cli
