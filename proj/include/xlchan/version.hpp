#pragma once

#define XLCHAN_VERSION_MAJOR 0
#define XLCHAN_VERSION_MINOR 1
#define XLCHAN_VERSION_PATCH 0

namespace xlchan {
inline constexpr const char* version_string = "0.1.0";
}
