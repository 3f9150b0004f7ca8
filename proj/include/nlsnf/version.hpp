#pragma once

namespace nlsnf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nlsnf
