#pragma once

namespace ndar {

inline constexpr const char* version = "0.1.0";

}  // namespace ndar
