#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kflow::cli {

/// Runs one `kflow` subcommand. Returns 0 on success, 2 on a usage error and 1
/// on a runtime error; messages go to stdout/stderr.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace kflow::cli
