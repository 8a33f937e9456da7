#pragma once

// Flat key=value run configuration files. Command-line flags always win;
// the CLI only consults the file for options the user did not pass.

#include <fstream>
#include <map>
#include <string>

#include "nbestslu/error.hpp"

namespace nbest {

inline std::map<std::string, std::string> load_key_value_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(format_msg("cannot read config file ", path));
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(format_msg(path, ":", lineno, ": expected key=value"));
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            std::size_t b2 = s.find_first_not_of(" \t");
            std::size_t e2 = s.find_last_not_of(" \t");
            s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(value);
        if (key.empty()) throw ParseError(format_msg(path, ":", lineno, ": empty key"));
        kv[key] = value;
    }
    return kv;
}

} // namespace nbest
