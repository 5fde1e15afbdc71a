#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bgnn {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// A dataset argument is either a directory or a name looked up under
// $BGNN_DATA_ROOT. Throws DataError if neither exists.
std::filesystem::path resolve_dataset(const std::string& spec);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace bgnn
