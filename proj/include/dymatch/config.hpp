#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "dymatch/errors.hpp"

namespace dymatch {

/// Flat key = value configuration, one pair per line, # comments.
class Config {
public:
    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
        return it->second;
    }

    long long get_int(const std::string& key, long long def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        return to_int(key, it->second);
    }

    long long require_int(const std::string& key) const {
        return to_int(key, require_string(key));
    }

    double get_double(const std::string& key, double def) const {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' is not a number: " + it->second);
        }
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static long long to_int(const std::string& key, const std::string& raw) {
        try {
            std::size_t pos = 0;
            long long v = std::stoll(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' is not an integer: " + raw);
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace dymatch
