#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace interdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

// Parses flat `key = value` lines; blank lines and lines starting with '#'
// are ignored. Throws InvalidArgument on malformed lines or repeated keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

const char* version();

}  // namespace interdyn::cli
