#pragma once

#include <stdexcept>
#include <string>

namespace dyndet {

/// Base error. Carries the module, operation and offending input.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string operation, std::string input, const std::string& what);

    const std::string& module() const noexcept { return module_; }
    const std::string& operation() const noexcept { return operation_; }
    const std::string& input() const noexcept { return input_; }

private:
    std::string module_;
    std::string operation_;
    std::string input_;
};

/// Bad input: malformed config, inadmissible word, invariant breach. CLI exit 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular systems, non-convergence, contour degeneracy. CLI exit 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace dyndet
