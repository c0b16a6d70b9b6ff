#pragma once

namespace sslb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sslb
