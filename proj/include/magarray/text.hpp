#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace magarray::text {

/// Shortest decimal form that parses back to the same double.
std::string fmt(double x);

std::vector<std::string_view> split_ws(std::string_view line);

/// Strips a '#' comment and surrounding whitespace.
std::string_view strip(std::string_view line);

/// Strict parses; throw std::invalid_argument with the offending token.
double to_double(std::string_view token);
long long to_int(std::string_view token);

/// Reads the whole file, throwing ConfigError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes via a temporary sibling and rename, so readers never see a
/// partially written file.
void write_file(const std::string& path, const std::string& content);

}  // namespace magarray::text
