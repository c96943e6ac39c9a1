#pragma once

namespace agler {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace agler
