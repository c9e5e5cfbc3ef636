#pragma once

namespace apcre {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace apcre
