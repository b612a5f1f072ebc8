#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace noisespec::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kTolerance = 3 };

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// "4..10" -> {4,...,10}; "1,3,5" -> {1,3,5}.
std::vector<int> parse_levels(const std::string& text);

}  // namespace noisespec::cli
