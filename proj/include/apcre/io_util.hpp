#pragma once

#include <stdexcept>
#include <string>

namespace apcre {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Writes to a temp file in the same directory, then renames into place, so a
// crash never leaves a partially written artifact.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// printf-style %.17g: round-trips any double, prints small integers bare
std::string fmt_full(double x);
// %.12g: report formatting
std::string fmt_short(double x);

}  // namespace apcre
