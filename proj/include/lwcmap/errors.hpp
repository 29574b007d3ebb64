#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lwcmap {

// Io errors map to CLI exit code 2, everything else to 1.
enum class ErrorKind { Validation, Io };

// Every failure in the library carries a stable machine-readable code
// ("NonMonotonicAxis", "SizeMismatch", ...) next to the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(ErrorKind::Validation, code, message);
}

[[noreturn]] inline void fail_io(const std::string& code, const std::string& message) {
    throw Error(ErrorKind::Io, code, message);
}

} // namespace lwcmap
