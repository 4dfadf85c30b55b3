#pragma once

namespace cxp {

// Keep in sync with the project() version in the top-level CMakeLists.
inline constexpr const char* kVersion = "0.1.0";

// Seed recorded in output headers when the caller does not pass one.
inline constexpr unsigned long long kDefaultSeed = 42;

}  // namespace cxp
