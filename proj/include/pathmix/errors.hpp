#pragma once

#include <stdexcept>
#include <string>

namespace pathmix {

// Malformed or inconsistent input: bad CSV rows, unknown node ids, mismatched
// node/group spaces, refusing to overwrite output files. The CLI maps this to
// exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Numerical failure: solver non-convergence, cost guards, degenerate
// statistics (no paths, degenerate mixing). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what_arg) : std::runtime_error(what_arg) {}

    NumericalError(const std::string& what_arg, double residual)
        : std::runtime_error(what_arg), residual_(residual), has_residual_(true) {}

    bool has_residual() const noexcept { return has_residual_; }
    double residual() const noexcept { return residual_; }

private:
    double residual_ = 0.0;
    bool has_residual_ = false;
};

}  // namespace pathmix
