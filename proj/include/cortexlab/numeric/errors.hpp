#pragma once

#include <stdexcept>
#include <string>

namespace cortexlab {

/// Shapes or settings that do not fit together.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A call made outside an operation's contract (bad action index, non-scalar loss, ...).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A non-finite value appeared; the message names the producing op.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cortexlab
