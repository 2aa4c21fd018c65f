#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hetpde::pngio {

// Decoded raster, always expanded to either 1 or 3 channels. 16-bit samples
// keep their full range; 8-bit files report bit_depth 8 with samples in
// [0, 255].
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 or 3
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint16_t> samples;  // row-major, channel interleaved
};

Raster read_png(const std::string& path);
void write_png(const std::string& path, const Raster& r);
bool looks_like_png(const std::string& path);

}
