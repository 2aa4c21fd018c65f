#pragma once

namespace hetpde {

inline constexpr const char* library_version = "0.1.0";

}
