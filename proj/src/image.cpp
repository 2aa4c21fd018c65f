#include "hetpde/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>

#include "hetpde/errors.hpp"
#include "hetpde/grid_io.hpp"
#include "png_codec.hpp"

namespace hetpde {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

RgbImage from_raster(const pngio::Raster& r) {
    if (r.width < 3 || r.height < 3)
        throw IoError("image too small, need at least 3x3 pixels");
    RgbImage img(GridGeometry(r.width, r.height, 1.0));
    const double maxval = r.bit_depth == 16 ? 65535.0 : 255.0;
    const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
    for (std::size_t i = 0; i < n; ++i)
        for (int b = 0; b < 3; ++b) {
            const std::size_t si = r.channels == 3 ? 3 * i + b : i;
            img.bands[b].values[i] = r.samples[si] / maxval;
        }
    return img;
}

int pnm_header_int(std::istream& in, const std::string& path) {
    int c;
    for (;;) {
        c = in.get();
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        if (c == EOF) throw IoError("truncated PNM header in " + path);
    }
    int v = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw IoError("malformed PNM header in " + path);
    return v;
}

RgbImage load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError("unsupported file format in " + path + " (need PNG, binary PGM or PPM)");
    const int channels = magic[1] == '6' ? 3 : 1;
    const int w = pnm_header_int(in, path);
    const int h = pnm_header_int(in, path);
    const int maxval = pnm_header_int(in, path);
    if (maxval <= 0 || maxval > 65535) throw IoError("bad PNM maxval in " + path);

    pngio::Raster r;
    r.width = w;
    r.height = h;
    r.channels = channels;
    r.bit_depth = maxval > 255 ? 16 : 8;
    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    r.samples.resize(count);
    if (maxval > 255) {
        std::vector<unsigned char> raw(count * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!in) throw IoError("truncated PNM data in " + path);
        for (std::size_t i = 0; i < count; ++i)
            r.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    } else {
        std::vector<unsigned char> raw(count);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!in) throw IoError("truncated PNM data in " + path);
        for (std::size_t i = 0; i < count; ++i) r.samples[i] = raw[i];
    }
    // Scale odd maxvals onto the full sample range.
    if (maxval != 255 && maxval != 65535) {
        const double full = r.bit_depth == 16 ? 65535.0 : 255.0;
        for (auto& s : r.samples)
            s = static_cast<std::uint16_t>(std::lround(s * full / maxval));
    }
    return from_raster(r);
}

}  // namespace

RgbImage load_image(const std::string& path) {
    if (pngio::looks_like_png(path)) return from_raster(pngio::read_png(path));
    return load_pnm(path);
}

void save_image(const std::string& path, const RgbImage& img, SaveMode mode, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_image: bit_depth must be 8 or 16");

    double lo = 0.0, scale = 1.0;
    if (mode == SaveMode::rescale) {
        double hi;
        lo = hi = img.bands[0].values[0];
        for (const ScalarField& b : img.bands) {
            lo = std::min(lo, field_min(b));
            hi = std::max(hi, field_max(b));
        }
        scale = hi > lo ? 1.0 / (hi - lo) : 0.0;

        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "mode=rescale\nmin=%.17g\nmax=%.17g\nnote=gray = (value - min) / (max - min)\n",
                      lo, hi);
        write_text_atomic(path + ".txt", buf);
    }

    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    auto quantize = [&](double v) {
        double t = (v - lo) * scale;
        t = std::fmin(std::fmax(t, 0.0), 1.0);
        return static_cast<std::uint16_t>(std::lround(t * maxval));
    };

    const std::size_t n = img.geom.nodes();
    if (has_suffix(path, ".pgm")) {
        for (int b = 1; b < 3; ++b)
            if (img.bands[b].values != img.bands[0].values)
                throw IoError("save_image: .pgm needs identical bands, use .ppm or .png");
        std::string out = "P5\n" + std::to_string(img.geom.width) + " " +
                          std::to_string(img.geom.height) + "\n" +
                          std::to_string(static_cast<int>(maxval)) + "\n";
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint16_t q = quantize(img.bands[0].values[i]);
            if (bit_depth == 16) out += static_cast<char>(q >> 8);
            out += static_cast<char>(q & 0xff);
        }
        write_text_atomic(path, out);
        return;
    }
    if (has_suffix(path, ".ppm")) {
        std::string out = "P6\n" + std::to_string(img.geom.width) + " " +
                          std::to_string(img.geom.height) + "\n" +
                          std::to_string(static_cast<int>(maxval)) + "\n";
        for (std::size_t i = 0; i < n; ++i)
            for (int b = 0; b < 3; ++b) {
                const std::uint16_t q = quantize(img.bands[b].values[i]);
                if (bit_depth == 16) out += static_cast<char>(q >> 8);
                out += static_cast<char>(q & 0xff);
            }
        write_text_atomic(path, out);
        return;
    }
    if (has_suffix(path, ".png")) {
        pngio::Raster r;
        r.width = img.geom.width;
        r.height = img.geom.height;
        r.channels = 3;
        r.bit_depth = bit_depth;
        r.samples.resize(n * 3);
        for (std::size_t i = 0; i < n; ++i)
            for (int b = 0; b < 3; ++b) r.samples[3 * i + b] = quantize(img.bands[b].values[i]);
        pngio::write_png(path, r);
        return;
    }
    throw IoError("save_image: unsupported extension in " + path);
}

RgbReconstructReport reconstruct_rgb(const HeterogeneousOperator& op, const RgbImage& stimulus,
                                     const GaussianParams& g, const SolverConfig& config) {
    RgbReconstructReport report;
    // Duplicate bands (grayscale content) share one solve.
    std::array<int, 3> owner{0, 1, 2};
    for (int b = 1; b < 3; ++b)
        for (int a = 0; a < b; ++a)
            if (stimulus.bands[b].values == stimulus.bands[a].values) {
                owner[b] = a;
                break;
            }
    std::array<std::future<SolveReport>, 3> jobs;
    for (int b = 0; b < 3; ++b)
        if (owner[b] == b)
            jobs[b] = std::async(std::launch::async, [&, b] {
                return reconstruct(op, stimulus.bands[b], g, config);
            });
    for (int b = 0; b < 3; ++b)
        if (owner[b] == b) report.bands[b] = jobs[b].get();
    for (int b = 0; b < 3; ++b)
        if (owner[b] != b) report.bands[b] = report.bands[owner[b]];
    return report;
}

RgbImage to_image(const RgbReconstructReport& report) {
    RgbImage img(report.bands[0].solution.geom);
    for (int b = 0; b < 3; ++b) img.bands[b] = report.bands[b].solution;
    return img;
}

RgbImage make_simultaneous_contrast(int width, int height, double strip_gray,
                                    double strip_fraction) {
    if (!(strip_gray >= 0.0 && strip_gray <= 1.0))
        throw std::invalid_argument("make_simultaneous_contrast: strip_gray must be in [0, 1]");
    if (!(strip_fraction > 0.0 && strip_fraction < 1.0))
        throw std::invalid_argument("make_simultaneous_contrast: strip_fraction must be in (0, 1)");

    RgbImage img(GridGeometry(width, height, 1.0));
    const int strip_rows = static_cast<int>(std::lround(strip_fraction * height));
    const int start = (height - strip_rows) / 2;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const bool in_strip = y >= start && y < start + strip_rows;
            const double v = in_strip ? strip_gray : static_cast<double>(x) / (width - 1);
            for (int b = 0; b < 3; ++b) img.bands[b].at(x, y) = v;
        }
    return img;
}

ScalarField make_smooth_stimulus(const GridGeometry& g) {
    ScalarField u(g);
    const double pi = std::numbers::pi;
    for (int y = 0; y < g.height; ++y) {
        const double ty = static_cast<double>(y) / (g.height - 1);
        for (int x = 0; x < g.width; ++x) {
            const double tx = static_cast<double>(x) / (g.width - 1);
            u.at(x, y) = 0.5 + 0.2 * std::sin(2.0 * pi * tx) * std::cos(pi * ty) +
                         0.2 * std::cos(2.0 * pi * ty);
        }
    }
    return u;
}

}
