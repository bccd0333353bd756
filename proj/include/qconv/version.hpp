#pragma once

namespace qconv {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qconv
