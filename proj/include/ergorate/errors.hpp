#pragma once

#include <stdexcept>
#include <string>

namespace ergorate {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A certified bracket could not be closed below the requested tolerance.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularPointError : std::domain_error {
    using std::domain_error::domain_error;
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct UnsupportedCombination : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ergorate
