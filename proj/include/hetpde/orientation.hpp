#pragma once

#include <cstdint>
#include <string>

#include "hetpde/grid.hpp"

namespace hetpde {

// Per-node orientation, stored reduced into [0, pi). Orientations are
// directions of lines, not of vectors, so theta and theta + pi describe the
// same element.
struct OrientationMap {
    GridGeometry geom;
    std::vector<double> theta;

    OrientationMap() = default;
    explicit OrientationMap(const GridGeometry& g) : geom(g), theta(g.nodes(), 0.0) {}

    double at(int x, int y) const { return theta[static_cast<std::size_t>(y) * geom.width + x]; }
    double& at(int x, int y) { return theta[static_cast<std::size_t>(y) * geom.width + x]; }
};

struct PinwheelParams {
    int n_samples = 30;
    std::uint64_t seed = 0;
    // 0 selects the default 4 / width.
    double frequency_scale = 0.0;
};

// Argument of a random superposition of N plane waves with directions
// 2*pi*k/N and i.i.d. uniform [0,1] amplitudes, reduced mod pi. Node
// coordinates enter as node index * spacing * frequency_scale.
OrientationMap pinwheel_map(const GridGeometry& g, const PinwheelParams& params);

// I.i.d. uniform [0, pi) per node.
OrientationMap salt_pepper_map(const GridGeometry& g, std::uint64_t seed);

OrientationMap constant_map(const GridGeometry& g, double theta);

// Per node: 0 with probability prob_horizontal, else pi/2.
OrientationMap binary_hv_map(const GridGeometry& g, double prob_horizontal, std::uint64_t seed);

// Reduce an angle into [0, pi).
double reduce_orientation(double theta);

// True when the orientation winds by +-pi around the 4-node plaquette with
// lower-left corner (x, y).
bool plaquette_singular(const OrientationMap& m, int x, int y);

// CSV layout identical to write_field_csv.
void write_orientation_csv(const std::string& path, const OrientationMap& m);

// 8-bit RGB with hue = 2*theta, full saturation and value.
void write_orientation_png(const std::string& path, const OrientationMap& m);

}
