#pragma once

#include <string_view>

namespace decenergy {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kToolName = "decenergy";

}  // namespace decenergy
