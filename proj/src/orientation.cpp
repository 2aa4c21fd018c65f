#include "hetpde/orientation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hetpde/grid_io.hpp"
#include "hetpde/random.hpp"
#include "png_codec.hpp"

namespace hetpde {

namespace {
constexpr double pi = std::numbers::pi;
}

double reduce_orientation(double theta) {
    double r = std::fmod(theta, pi);
    if (r < 0.0) r += pi;
    if (r >= pi) r = 0.0;  // fmod can round up to pi
    return r;
}

OrientationMap pinwheel_map(const GridGeometry& g, const PinwheelParams& params) {
    if (params.n_samples < 1)
        throw std::invalid_argument("pinwheel_map: n_samples must be >= 1");
    if (params.frequency_scale < 0.0)
        throw std::invalid_argument("pinwheel_map: frequency_scale must be >= 0");
    const double fs =
        params.frequency_scale > 0.0 ? params.frequency_scale : 4.0 / g.width;

    std::mt19937_64 rng(params.seed);
    const int n = params.n_samples;
    std::vector<double> amp(n), dir_cos(n), dir_sin(n);
    for (int k = 0; k < n; ++k) {
        amp[k] = uniform_unit(rng);
        const double phi = 2.0 * pi * (k + 1) / n;
        dir_cos[k] = std::cos(phi);
        dir_sin[k] = std::sin(phi);
    }

    OrientationMap m(g);
    for (int y = 0; y < g.height; ++y) {
        const double x2 = y * g.spacing * fs;
        for (int x = 0; x < g.width; ++x) {
            const double x1 = x * g.spacing * fs;
            double re = 0.0, im = 0.0;
            for (int k = 0; k < n; ++k) {
                const double phase = 2.0 * pi * (x1 * dir_cos[k] + x2 * dir_sin[k]);
                re += amp[k] * std::cos(phase);
                im += amp[k] * std::sin(phase);
            }
            if (re == 0.0 && im == 0.0)
                throw std::runtime_error("pinwheel_map: degenerate coefficients, zero sum at node (" +
                                         std::to_string(x) + ", " + std::to_string(y) + ")");
            m.at(x, y) = reduce_orientation(std::atan2(im, re));
        }
    }
    return m;
}

OrientationMap salt_pepper_map(const GridGeometry& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OrientationMap m(g);
    for (double& t : m.theta) t = uniform_below(rng, pi);
    return m;
}

OrientationMap constant_map(const GridGeometry& g, double theta) {
    if (!std::isfinite(theta))
        throw std::invalid_argument("constant_map: theta must be finite");
    OrientationMap m(g);
    const double t = reduce_orientation(theta);
    for (double& v : m.theta) v = t;
    return m;
}

OrientationMap binary_hv_map(const GridGeometry& g, double prob_horizontal, std::uint64_t seed) {
    if (!(prob_horizontal >= 0.0 && prob_horizontal <= 1.0))
        throw std::invalid_argument("binary_hv_map: probability must be in [0, 1]");
    std::mt19937_64 rng(seed);
    OrientationMap m(g);
    for (double& t : m.theta)
        t = uniform_unit(rng) < prob_horizontal ? 0.0 : pi / 2.0;
    return m;
}

namespace {

// Difference of two orientations wrapped into (-pi/2, pi/2].
double wrap_half(double d) {
    while (d > pi / 2.0) d -= pi;
    while (d <= -pi / 2.0) d += pi;
    return d;
}

}  // namespace

bool plaquette_singular(const OrientationMap& m, int x, int y) {
    if (x < 0 || y < 0 || x + 1 >= m.geom.width || y + 1 >= m.geom.height)
        throw std::invalid_argument("plaquette_singular: plaquette outside grid");
    const double a = m.at(x, y);
    const double b = m.at(x + 1, y);
    const double c = m.at(x + 1, y + 1);
    const double d = m.at(x, y + 1);
    const double winding =
        wrap_half(b - a) + wrap_half(c - b) + wrap_half(d - c) + wrap_half(a - d);
    return std::abs(winding) > pi / 2.0;
}

void write_orientation_csv(const std::string& path, const OrientationMap& m) {
    ScalarField f(m.geom);
    f.values = m.theta;
    write_field_csv(path, f);
}

namespace {

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
    const double c = v * s;
    const double hp = h / (pi / 3.0);  // sector width 60 degrees
    const double xm = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = xm; }
    else if (hp < 2) { r = xm; g = c; }
    else if (hp < 3) { g = c; b = xm; }
    else if (hp < 4) { g = xm; b = c; }
    else if (hp < 5) { r = xm; b = c; }
    else             { r = c; b = xm; }
    const double m0 = v - c;
    rgb[0] = r + m0;
    rgb[1] = g + m0;
    rgb[2] = b + m0;
}

}  // namespace

void write_orientation_png(const std::string& path, const OrientationMap& m) {
    pngio::Raster r;
    r.width = m.geom.width;
    r.height = m.geom.height;
    r.channels = 3;
    r.bit_depth = 8;
    r.samples.resize(m.theta.size() * 3);
    for (size_t i = 0; i < m.theta.size(); ++i) {
        double rgb[3];
        double hue = 2.0 * m.theta[i];
        if (hue >= 2.0 * pi) hue = 0.0;
        hsv_to_rgb(hue, 1.0, 1.0, rgb);
        for (int c = 0; c < 3; ++c)
            r.samples[3 * i + c] =
                static_cast<std::uint16_t>(std::lround(rgb[c] * 255.0));
    }
    pngio::write_png(path, r);
}

}
