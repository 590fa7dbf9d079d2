#pragma once

namespace memnav {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1; // shared by all binary/JSON artifacts

} // namespace memnav
