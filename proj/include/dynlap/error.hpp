#pragma once

#include <stdexcept>
#include <string>

namespace dynlap {

/// Failure category; maps onto the CLI exit codes.
enum class ErrorKind {
    Validation,  ///< bad input or configuration (exit 2)
    Numerical,   ///< solver or geometry failure (exit 3)
    Io,          ///< missing or unreadable file (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& what) { throw Error(ErrorKind::Validation, what); }
[[noreturn]] inline void fail_numerical(const std::string& what) { throw Error(ErrorKind::Numerical, what); }
[[noreturn]] inline void fail_io(const std::string& what) { throw Error(ErrorKind::Io, what); }

} // namespace dynlap
