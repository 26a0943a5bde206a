#pragma once

#include <stdexcept>
#include <string>

namespace hp43 {

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical guard tripped: blow-up, stalled optimizer, non-mixing chain (CLI exit code 3).
class NumericalGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A grid or buffer would exceed the configured memory cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A drift policy tried to read Wiener increments from the future.
class AdaptednessError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace hp43
