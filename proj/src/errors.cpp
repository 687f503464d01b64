#include "dyndet/errors.hpp"

#include <utility>

namespace dyndet {

Error::Error(std::string module, std::string operation, std::string input, const std::string& what)
    : std::runtime_error(module + "::" + operation + ": " + what + (input.empty() ? "" : " [input: " + input + "]")),
      module_(std::move(module)),
      operation_(std::move(operation)),
      input_(std::move(input)) {}

}  // namespace dyndet
