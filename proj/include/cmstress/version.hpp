#pragma once

#include <string_view>

namespace cmstress {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

}  // namespace cmstress
