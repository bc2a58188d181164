#pragma once

namespace digitsum {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace digitsum
