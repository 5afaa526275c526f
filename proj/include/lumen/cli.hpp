#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lumen {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one command. args excludes the program name. Every successful run
/// writes run.meta.json next to its primary output; `--replay <run.meta.json>`
/// reruns the recorded command from the recorded working directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

} // namespace lumen
