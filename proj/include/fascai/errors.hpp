#pragma once

#include <stdexcept>
#include <string>

namespace fascai {

// Bad input: out-of-range values, malformed configs, impossible parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An interaction step that the trial protocol does not allow in the current phase.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// The event log could not be written or read.
class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fascai
