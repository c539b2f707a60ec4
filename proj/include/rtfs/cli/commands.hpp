#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtfs/cli/config.hpp"

namespace rtfs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSuiteFailure = 1;
inline constexpr int kExitConfigError = 2;

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parse, validate, dispatch. Errors are reported on err and mapped to the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtfs::cli
