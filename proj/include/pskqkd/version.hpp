#pragma once

namespace pskqkd {
inline constexpr const char* kVersion = "1.0.0";
}
