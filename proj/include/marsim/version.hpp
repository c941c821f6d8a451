#pragma once

namespace marsim {
inline constexpr const char* kVersion = "0.1.0";
}
