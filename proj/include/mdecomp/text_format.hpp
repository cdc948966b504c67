#pragma once

#include <string>
#include <string_view>

namespace mdecomp {

/// Round-trippable decimal rendering (17 significant digits, "C" locale).
std::string format_double(double value);

/// Strict decimal parse of the whole token; returns false on any trailing junk.
bool parse_double(std::string_view token, double& out);

/// Lowercase ASCII slug usable as a file name stem ("Law & Order" -> "law_order").
std::string slugify(std::string_view name);

std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate + write, throws Io on failure.
void write_file(const std::string& path, std::string_view contents);

}  // namespace mdecomp
