#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dppmb::textio {

// Shortest round-trip decimal representation; locale-independent.
std::string format_double(double v);

double parse_double(const std::string& text, const std::string& what);
int64_t parse_int(const std::string& text, const std::string& what);
uint64_t parse_uint(const std::string& text, const std::string& what);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Splits on runs of whitespace; no empty fields.
std::vector<std::string> split_ws(const std::string& s);

// `key = value` lines with `#` comments; returns pairs in file order.
std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dppmb::textio
