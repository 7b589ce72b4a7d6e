#include "bandgen/error.hpp"

#include <string>

namespace bandgen {

std::string_view to_string(ErrorCategory c) noexcept
{
    switch (c) {
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::Capability: return "capability";
    case ErrorCategory::Numeric: return "numeric";
    }
    return "unknown";
}

BandOverflowError::BandOverflowError(int u_, int v_, int stretch_, int width_)
    : CapabilityError("band overflow: edge {" + std::to_string(u_) + ", " + std::to_string(v_) +
                      "} has stretch " + std::to_string(stretch_) + " > width " + std::to_string(width_)),
      u(u_), v(v_), stretch(stretch_), width(width_)
{}

} // namespace bandgen
