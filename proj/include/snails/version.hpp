#pragma once

namespace snails {
inline constexpr const char* kVersion = "1.0.0";
}
