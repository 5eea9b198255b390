#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace chnet {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Whole-string parse; throws ConfigError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);
unsigned long long parse_unsigned(std::string_view s, std::string_view what);

/// Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace chnet
