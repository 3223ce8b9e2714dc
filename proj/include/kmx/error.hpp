#pragma once

#include <stdexcept>
#include <string>

namespace kmx {

// Caller misuse: bad arguments, out-of-range parameters, mismatched dimensions.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Problems with input data: parse failures, degenerate datasets.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// An exact/enumerative routine refused because the instance exceeds its budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Centroid of an empty subset was requested; callers must handle this.
struct EmptyClusterError : std::runtime_error {
    explicit EmptyClusterError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kmx
