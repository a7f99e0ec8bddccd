#pragma once

namespace mgsn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mgsn
