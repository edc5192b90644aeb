#pragma once

namespace sigtask {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sigtask
