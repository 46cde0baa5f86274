#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace smallpar::cli {

/// Tool version written into every CSV header.
const char* version();

/// Parses the command line (without the program name), runs one command and
/// returns its exit code: 0 holds or converged, 2 fails, 3 inconclusive,
/// 1 usage or configuration error. CSV goes to `out` unless --out is given;
/// the verdict line always goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smallpar::cli
