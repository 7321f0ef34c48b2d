#pragma once

namespace sfg {

#ifndef SFGSTA_VERSION
#define SFGSTA_VERSION "0.1.0"
#endif

inline constexpr const char* kVersion = SFGSTA_VERSION;

}  // namespace sfg
