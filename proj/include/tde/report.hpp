#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tde/errors.hpp"

namespace tde {

// Deterministic text reports: fixed formatting, no timestamps, no pointers.
// Rerunning a command with the same seed must reproduce every byte.

inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Report {
public:
    void line(const std::string& s) { text_ += s + "\n"; }
    void kv(const std::string& key, const std::string& value) { text_ += key + ": " + value + "\n"; }
    void kv(const std::string& key, double value) { kv(key, fmt_double(value)); }
    void kv(const std::string& key, long value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, std::size_t value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, unsigned long long value) { kv(key, std::to_string(value)); }
    void blank() { text_ += "\n"; }
    void section(const std::string& name) { text_ += "[" + name + "]\n"; }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    require(out.good(), errc::config_error, "cannot write " + path);
    out << content;
}

}  // namespace tde
