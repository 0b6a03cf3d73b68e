#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace foe::cli {

/// Runs one CLI invocation (validate | label | train | evaluate | predict).
/// Returns the process exit code; all human output goes to `out`, errors to
/// `err`. Exposed as a function so tests can drive the CLI in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace foe::cli
