#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace okp::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;

/// Runs `okp <subcommand> ...`; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// PGM (P5) rendering of the objectness attention of a feature file.
std::string activation_pgm(const std::string& features_path, double alpha);

}  // namespace okp::cli
