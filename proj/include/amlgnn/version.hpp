#pragma once

namespace amlgnn {

inline constexpr const char* kToolName = "amlgnn";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace amlgnn
