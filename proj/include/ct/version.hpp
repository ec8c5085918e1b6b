#pragma once

namespace ct {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace ct
