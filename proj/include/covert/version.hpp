#pragma once

namespace covert {
inline constexpr const char* kVersion = "1.0.0";
}  // namespace covert
