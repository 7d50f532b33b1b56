#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace paulimag::cli {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 domain error (a JSON error object on `err`), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paulimag::cli
