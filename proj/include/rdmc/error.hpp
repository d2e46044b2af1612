#pragma once

#include <stdexcept>
#include <string>

namespace rdmc {

// Mirrors the rdmc_status codes of the C API (see rdmc.h).
enum class ErrorCode {
    InvalidArgument = 1,
    CapExceeded = 2,
    ExactUnavailable = 3,
    NonFinite = 4,
    Io = 5,
    Format = 6,
    Checksum = 7,
    Version = 8,
    Precondition = 9,
    Internal = 10,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) fail(code, what);
}

}  // namespace rdmc
