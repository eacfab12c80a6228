#pragma once

#include <stdexcept>
#include <string>

#include "tracegraph.h"

namespace tg {

// Core error type. The status code maps 1:1 onto the public C API codes so
// the boundary translation is a field copy.
class Error : public std::runtime_error {
public:
    Error(tg_status status, std::string message)
        : std::runtime_error(std::move(message)), status_(status) {}

    tg_status status() const noexcept { return status_; }

private:
    tg_status status_;
};

[[noreturn]] inline void fail(tg_status status, const std::string &message) {
    throw Error(status, message);
}

inline const char *status_name(int status) {
    switch (status) {
    case TG_OK: return "ok";
    case TG_ERR_IO: return "io";
    case TG_ERR_BAD_MAGIC: return "bad-magic";
    case TG_ERR_BAD_VERSION: return "bad-version";
    case TG_ERR_TRUNCATED: return "truncated";
    case TG_ERR_TRAILING_DATA: return "trailing-data";
    case TG_ERR_NON_FINITE: return "non-finite";
    case TG_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case TG_ERR_DIM_MISMATCH: return "dim-mismatch";
    case TG_ERR_OUT_OF_RANGE: return "out-of-range";
    case TG_ERR_PARSE: return "parse";
    case TG_ERR_MISSING_INPUT: return "missing-input";
    case TG_ERR_NUMERIC: return "numeric";
    default: return "internal";
    }
}

} // namespace tg
