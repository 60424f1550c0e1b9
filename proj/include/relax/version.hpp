#pragma once

namespace relax {

inline constexpr const char* kCodeVersion = "1.0.0";

}  // namespace relax
