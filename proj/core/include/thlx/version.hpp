#pragma once

namespace thlx {
inline constexpr const char* kVersion = "0.1.0";
}
