// SPDX-License-Identifier: Apache-2.0
#ifndef HHEKIT_ERRORS_HPP
#define HHEKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hhekit {

// Invalid argument values (bad k, unknown bus config, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Caller violated an operation precondition (operand out of range, length mismatch).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Object is in the wrong state for the requested operation (domain mismatch, missing basis).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Fixed-point value left the representable range; carries the pipeline stage where it happened.
class OverflowError : public std::runtime_error {
public:
    OverflowError(const std::string& what, int stage)
        : std::runtime_error(what + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}
    int stage() const noexcept { return stage_; }

private:
    int stage_;
};

// Malformed serialized data; carries the byte offset of the problem.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, size_t offset)
        : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
    size_t offset() const noexcept { return offset_; }

private:
    size_t offset_;
};

// Simulator made no progress or an internal invariant failed.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hhekit

#endif  // HHEKIT_ERRORS_HPP
