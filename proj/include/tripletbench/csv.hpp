#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tripletbench::csv {

// Splits one line on commas. No quoting: none of the formats here need it.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

// Lines with trailing '\r' removed; a final empty line is dropped.
std::vector<std::string_view> lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
std::string format_fixed(double value, int decimals);

// Strict number parsing: the whole cell must be consumed.
bool parse_double(std::string_view cell, double& out);
bool parse_size(std::string_view cell, std::size_t& out);

}  // namespace tripletbench::csv
