#include "hetpde/grid_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hetpde/errors.hpp"
#include "png_codec.hpp"

namespace hetpde {

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_field_csv(const std::string& path, const ScalarField& u) {
    std::string out;
    out.reserve(u.values.size() * 20);
    for (int y = 0; y < u.geom.height; ++y) {
        for (int x = 0; x < u.geom.width; ++x) {
            if (x) out += ',';
            out += format_value(u.at(x, y));
        }
        out += '\n';
    }
    write_text_atomic(path, out);
}

ScalarField read_field_csv(const std::string& path, double spacing) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("bad CSV cell '" + cell + "' in " + path);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty CSV " + path);
    const size_t w = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != w) throw IoError("ragged CSV rows in " + path);

    ScalarField u(GridGeometry(static_cast<int>(w), static_cast<int>(rows.size()), spacing));
    for (int y = 0; y < u.geom.height; ++y)
        for (int x = 0; x < u.geom.width; ++x) u.at(x, y) = rows[y][x];
    return u;
}

void write_field_png16(const std::string& path, const ScalarField& u) {
    const double lo = field_min(u);
    const double hi = field_max(u);
    const double range = hi - lo;
    const double scale = range > 0.0 ? 65535.0 / range : 0.0;

    pngio::Raster r;
    r.width = u.geom.width;
    r.height = u.geom.height;
    r.channels = 1;
    r.bit_depth = 16;
    r.samples.resize(u.values.size());
    for (size_t i = 0; i < u.values.size(); ++i) {
        const double q = (u.values[i] - lo) * scale;
        r.samples[i] = static_cast<std::uint16_t>(std::lround(std::fmin(std::fmax(q, 0.0), 65535.0)));
    }
    pngio::write_png(path, r);

    std::string meta;
    meta += "min=" + format_value(lo) + "\n";
    meta += "max=" + format_value(hi) + "\n";
    meta += "scale=" + format_value(scale) + "\n";
    meta += "offset=" + format_value(-lo * scale) + "\n";
    meta += "note=sample = round((value - min) * scale)\n";
    write_text_atomic(path + ".txt", meta);
}

void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
    std::string out;
    out.reserve(trace.size() * 24);
    for (size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_value(trace[i]);
        out += '\n';
    }
    write_text_atomic(path, out);
}

}
