#pragma once

#include <cstddef>
#include <string_view>

namespace anchorlab {

using ContextId = std::size_t;

enum class InterpolationSpace { Logit, Probability };

std::string_view to_string(InterpolationSpace space) noexcept;
// Accepts "logit" / "prob" / "probability".
InterpolationSpace parse_space(std::string_view text);

}  // namespace anchorlab
