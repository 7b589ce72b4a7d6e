#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bandgen {

/// Entry point of the `bandgen` tool; args excludes the program name.
/// Failures print one line "error: <category>: <detail>" and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code used for each error category.
int exit_code_for(const std::string& category);

} // namespace bandgen
