#pragma once

#include <array>
#include <string>

#include "hetpde/solver.hpp"

namespace hetpde {

// Three-band raster with values in [0, 1] and unit spacing.
struct RgbImage {
    GridGeometry geom;
    std::array<ScalarField, 3> bands;

    RgbImage() = default;
    explicit RgbImage(const GridGeometry& g)
        : geom(g), bands{ScalarField(g), ScalarField(g), ScalarField(g)} {}
};

// PNG (8/16-bit, gray or RGB) or binary PPM/PGM. Grayscale sources are
// duplicated into all three bands.
RgbImage load_image(const std::string& path);

enum class SaveMode {
    clip,     // clamp to [0, 1], then quantize
    rescale,  // one affine min-max map across all bands, logged to <path>.txt
};

// Format by extension: .png, .ppm, or .pgm (grayscale, requires identical
// bands). bit_depth is 8 or 16.
void save_image(const std::string& path, const RgbImage& img, SaveMode mode, int bit_depth = 8);

struct RgbReconstructReport {
    std::array<SolveReport, 3> bands;
};

// Per-band lightness reconstruction with a shared operator; the three bands
// are solved concurrently.
RgbReconstructReport reconstruct_rgb(const HeterogeneousOperator& op, const RgbImage& stimulus,
                                     const GaussianParams& g, const SolverConfig& config);

RgbImage to_image(const RgbReconstructReport& report);

// Gray test chart: background ramp 0 -> 1 left to right, horizontal centered
// strip of constant gray covering strip_fraction of the height.
RgbImage make_simultaneous_contrast(int width, int height, double strip_gray,
                                    double strip_fraction = 1.0 / 3.0);

// Smooth synthetic pattern in [0.1, 0.9] with structure along both axes.
ScalarField make_smooth_stimulus(const GridGeometry& g);

}
