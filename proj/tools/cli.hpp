#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gsd::cli {

/// Runs one `gsdkit` invocation. `args` excludes the program name. Progress
/// goes to `out`; failures are reported on `err` as a JSON object. Returns
/// the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsd::cli
