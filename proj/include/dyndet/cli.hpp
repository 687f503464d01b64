#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dyndet {

/// Entry point of the `dyndet` tool. Exit status 0 on success, 1 on validation
/// errors, 2 on numerical failures.
int run(int argc, char** argv);

/// Same with explicit streams; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dyndet
