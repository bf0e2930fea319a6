#pragma once

namespace orthoaugm {

inline constexpr const char* kToolName = "orthoaugm";
inline constexpr const char* kToolVersion = "0.1.0";

/// Version tag expected in study/sweep run-config JSON files.
inline constexpr int kConfigVersion = 1;

}  // namespace orthoaugm
