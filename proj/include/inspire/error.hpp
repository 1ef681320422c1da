#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace inspire {

enum class ErrorCode {
    not_found,
    validation,
    provider_failure,
    empty_retrieval,
    conflict,
    parse,
    io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the engine. The code drives CLI exit status and
// HTTP status mapping.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace inspire
