#pragma once

namespace szego {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace szego
