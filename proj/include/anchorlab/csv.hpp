#pragma once

#include <optional>
#include <string>

namespace anchorlab {

// Shortest form that round-trips: "%.17g", '.' decimal point, no locale.
std::string format_real(double value);
// Empty field for "not applicable".
std::string format_real(const std::optional<double>& value);

}  // namespace anchorlab
