#pragma once

#include <stdexcept>
#include <string>

namespace tsnsim {

/// Malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Query against a trace for something that does not exist in it.
class QueryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure while reading or writing artifacts.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken kernel invariant. Never expected with a validated config.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace tsnsim
