#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rcc {

// Shortest round-trip decimal representation of a double; used for every
// float we write to CSV/JSON/SVG so re-runs diff cleanly.
std::string format_double(double x);

// split a CSV line on commas (fields never contain quoted commas in our
// schemas)
std::vector<std::string> split_csv_line(std::string_view line);

double parse_double(std::string_view s, const std::string& context);
long parse_long(std::string_view s, const std::string& context);

// FNV-1a 64-bit, hex-encoded; used for manifest input/config digests
std::string fnv1a_hex(std::string_view data);
std::string fnv1a_file_hex(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

}  // namespace rcc
