#pragma once

#include <stdexcept>
#include <string>

namespace bodepace {

/// Precondition or configuration violation (bad parameters, malformed input).
class invalid_configuration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a meaningful number.
class numerical_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation landed on (or numerically at) a pole.
class singular_evaluation : public numerical_failure {
public:
    using numerical_failure::numerical_failure;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw invalid_configuration(message);
    }
}

}  // namespace detail
}  // namespace bodepace
