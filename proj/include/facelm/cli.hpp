#pragma once

#include <string>
#include <vector>

namespace facelm::cli {

/// Runs one command line (program name first). Artifacts go to the
/// output directory, diagnostics to stderr. Returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace facelm::cli
