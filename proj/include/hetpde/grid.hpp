#pragma once

#include <cstddef>
#include <vector>

namespace hetpde {

// Uniform square lattice. Node (x, y) sits at (x * spacing, y * spacing),
// x in [0, width), y in [0, height).
struct GridGeometry {
    int width = 0;
    int height = 0;
    double spacing = 1.0;

    GridGeometry() = default;
    GridGeometry(int w, int h, double eps);

    std::size_t nodes() const { return static_cast<std::size_t>(width) * height; }
    bool operator==(const GridGeometry&) const = default;
};

// Lattice direction in node units; (0,0) is allowed as the explicit rest
// element of a stencil family.
struct StencilVector {
    int dx = 0;
    int dy = 0;
    bool operator==(const StencilVector&) const = default;
};

// Row-major node values, x fastest.
struct ScalarField {
    GridGeometry geom;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridGeometry& g, double fill = 0.0);

    double at(int x, int y) const { return values[idx(x, y)]; }
    double& at(int x, int y) { return values[idx(x, y)]; }

    bool contains(int x, int y) const {
        return x >= 0 && x < geom.width && y >= 0 && y < geom.height;
    }

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * geom.width + x;
    }
};

ScalarField make_field(const GridGeometry& g, double fill);

// Forward difference (u(x + eps*z) - u(x)) / eps. Cells whose neighbour
// leaves the grid hold 0, the zero extension used by every summation-by-parts
// identity in the library.
ScalarField difference_op(const ScalarField& u, StencilVector z);

// sqrt(eps^2 * sum v^2)
double l2_norm(const ScalarField& v);

// sqrt(eps^2 * sum_z sum_x |difference_op(u, z)|^2)
double sobolev_seminorm(const ScalarField& u, const std::vector<StencilVector>& lambda);

// Piecewise-constant completion: value of the node whose half-open cell
// [y_i - eps/2, y_i + eps/2) contains the point. Throws std::domain_error
// outside the grid's bounding box.
double mesh_completion(const ScalarField& u, double px, double py);

double field_mean(const ScalarField& u);
double field_min(const ScalarField& u);
double field_max(const ScalarField& u);

}
