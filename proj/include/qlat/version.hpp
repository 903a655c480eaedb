#pragma once

namespace qlat {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qlat
