#pragma once

namespace dynmte {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dynmte
