#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace agentkit {

// Every tool or provider failure maps to exactly one of these.
enum class ErrorClass {
    transient_network,
    timeout,
    invalid_arguments,
    tool_not_found,
    tool_crash,
    provider_error,
    recursion_limit,
};

inline constexpr std::array<ErrorClass, 7> kAllErrorClasses{
    ErrorClass::transient_network, ErrorClass::timeout,    ErrorClass::invalid_arguments,
    ErrorClass::tool_not_found,    ErrorClass::tool_crash, ErrorClass::provider_error,
    ErrorClass::recursion_limit,
};

std::string_view to_string(ErrorClass c) noexcept;
std::optional<ErrorClass> error_class_from_string(std::string_view s) noexcept;

// Only transport-level failures are worth repeating; the rest fail the same way again.
constexpr bool is_retryable(ErrorClass c) noexcept {
    return c == ErrorClass::transient_network || c == ErrorClass::timeout;
}

}  // namespace agentkit
