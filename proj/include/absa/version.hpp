#pragma once

namespace absa {

inline constexpr const char* kToolName = "absa_pair";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace absa
