#pragma once

namespace lwcmap {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kModelSchemaVersion = 1;

} // namespace lwcmap
