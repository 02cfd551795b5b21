#pragma once

namespace aviary {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace aviary
