#pragma once

namespace pve {
inline constexpr const char* kVersion = "0.1.0";
}
