#ifndef LBD_TEXT_FORMAT_HPP_
#define LBD_TEXT_FORMAT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lbd {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char delimiter);
std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

}  // namespace lbd

#endif  // LBD_TEXT_FORMAT_HPP_
