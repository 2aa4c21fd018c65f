#include "png_codec.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

#include "hetpde/errors.hpp"

namespace hetpde::pngio {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

bool looks_like_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);
    unsigned char sig[8] = {0};
    const size_t n = std::fread(sig, 1, 8, f.get());
    return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Raster read_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng init failed");
    }

    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG " + path);
    }

    png_init_io(png, f.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    // Normalize to 8- or 16-bit gray or RGB.
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // little-endian in memory
    png_read_update_info(png, info);

    const int out_depth = png_get_bit_depth(png, info);
    const int out_channels = png_get_channels(png, info);
    if (out_channels != 1 && out_channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel layout in " + path);
    }

    const size_t row_bytes = png_get_rowbytes(png, info);
    data.resize(row_bytes * h);
    row_ptrs.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = data.data() + y * row_bytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Raster r;
    r.width = static_cast<int>(w);
    r.height = static_cast<int>(h);
    r.channels = out_channels;
    r.bit_depth = out_depth;
    r.samples.resize(static_cast<size_t>(w) * h * out_channels);
    if (out_depth == 16) {
        const auto* src = reinterpret_cast<const std::uint16_t*>(data.data());
        std::memcpy(r.samples.data(), src, r.samples.size() * sizeof(std::uint16_t));
    } else if (out_depth == 8) {
        for (size_t i = 0; i < r.samples.size(); ++i) r.samples[i] = data[i];
    } else {
        throw IoError("unsupported PNG bit depth in " + path);
    }
    return r;
}

void write_png(const std::string& path, const Raster& r) {
    if (r.bit_depth != 8 && r.bit_depth != 16)
        throw IoError("write_png: bit depth must be 8 or 16");
    if (r.channels != 1 && r.channels != 3)
        throw IoError("write_png: channels must be 1 or 3");

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng init failed");
    }

    std::vector<unsigned char> bytes;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG " + path);
    }

    png_init_io(png, f.get());
    const int color = (r.channels == 1) ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, r.width, r.height, r.bit_depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t samples_per_row = static_cast<size_t>(r.width) * r.channels;
    const size_t bytes_per_row = samples_per_row * (r.bit_depth / 8);
    bytes.resize(bytes_per_row * r.height);
    for (int y = 0; y < r.height; ++y) {
        unsigned char* dst = bytes.data() + static_cast<size_t>(y) * bytes_per_row;
        const std::uint16_t* src = r.samples.data() + static_cast<size_t>(y) * samples_per_row;
        if (r.bit_depth == 8) {
            for (size_t i = 0; i < samples_per_row; ++i)
                dst[i] = static_cast<unsigned char>(src[i] & 0xff);
        } else {
            for (size_t i = 0; i < samples_per_row; ++i) {  // big-endian per the format
                dst[2 * i] = static_cast<unsigned char>(src[i] >> 8);
                dst[2 * i + 1] = static_cast<unsigned char>(src[i] & 0xff);
            }
        }
    }
    row_ptrs.resize(r.height);
    for (int y = 0; y < r.height; ++y)
        row_ptrs[y] = bytes.data() + static_cast<size_t>(y) * bytes_per_row;
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}
