#pragma once

namespace probeforge {

inline constexpr const char* kToolName = "probeforge";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace probeforge
