#pragma once

#include <stdexcept>
#include <string>

namespace vpsal {

enum class ErrorCode {
    Io,
    Format,
    InvalidArgument,
    Degenerate,
    NoVanishingPoint,
    Data,
    /// Too many per-image failures for an aggregate result to be meaningful.
    TooManyFailures,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vpsal
