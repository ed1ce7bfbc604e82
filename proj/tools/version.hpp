#pragma once

namespace delaystab::cli {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace delaystab::cli
