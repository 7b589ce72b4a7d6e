#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bandgen {

/// Error categories surfaced by the CLI as a machine-parsable prefix.
enum class ErrorCategory { Input, Format, Capability, Numeric };

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(ErrorCategory::Format, what) {}
};

struct CapabilityError : Error {
    explicit CapabilityError(const std::string& what) : Error(ErrorCategory::Capability, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

/// An edge does not fit inside the requested band width.
struct BandOverflowError : CapabilityError {
    BandOverflowError(int u, int v, int stretch, int width);
    int u, v, stretch, width;
};

} // namespace bandgen
