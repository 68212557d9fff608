#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stereogen::cli {

/// Entry point of the `stereogen` tool. Results go to `out` as one JSON line,
/// progress and errors to `err`. Errors are a single JSON line carrying the
/// error class. Returns 0 on success, 1 on a job error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stereogen::cli
