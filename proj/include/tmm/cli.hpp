#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tmm {

/// Runs one `tmm` command line (args excludes the program name). Returns the
/// process exit code: 0 ok, 1 operation error (a JSON error line goes to
/// `err`), 2 usage error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tmm
