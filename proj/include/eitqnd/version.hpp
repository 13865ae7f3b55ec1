#pragma once

namespace eitqnd {
inline constexpr const char* kVersion = "0.1.0";
}
