#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rsc::cli {

//! Exit codes of the command-line tool.
enum Exit : int
{
  Ok = 0,
  BadFlags = 2,
  DataError = 3,
  NumericError = 4,
};

//! Runs the tool on argv-style arguments (args[0] is the program name).
int
run(const std::vector<std::string>& args);

int
run(int argc, char** argv);

//! Lower-case hex SHA-256 of a file's bytes.
std::string
sha256_file(const std::filesystem::path& path);

} // namespace rsc::cli
