#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ikg {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

std::string_view version();

/*
  ikg <subcommand> [flags]

    validate  --config FILE [--override k=v]...
    run       --config FILE [--seed N] [--output DIR] [--workers N] [--override k=v]...
    decide    --state FILE [--config FILE] [--seed N] [--step N] [--override k=v]...
    oc        --state FILE [--config FILE] [--seed N] [--points N] [--override k=v]...
    selftest  [--seed N]

  `args` excludes the program name. Reports go to `out`, diagnostics to `err`.
*/
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ikg
