#pragma once

namespace pathmix {

inline constexpr const char* kVersion = "0.1.0";

// Bumped when the on-disk JSON layout of models or reports changes shape.
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

}  // namespace pathmix
