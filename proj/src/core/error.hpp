#pragma once

#include <stdexcept>
#include <string>

namespace uqx {

// Two failure classes surface through the C API and the CLI exit codes:
// malformed or inconsistent inputs (exit 2) and numerically undefined
// results (exit 3). Everything thrown inside the library is one of these.
enum class ErrorKind {
    Input,
    Numeric,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& message) : Error(ErrorKind::Input, message) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error(ErrorKind::Numeric, message) {}
};

inline void require_input(bool condition, const std::string& message) {
    if (!condition) throw InputError(message);
}

inline void require_numeric(bool condition, const std::string& message) {
    if (!condition) throw NumericError(message);
}

} // namespace uqx
