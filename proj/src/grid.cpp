#include "hetpde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hetpde {

GridGeometry::GridGeometry(int w, int h, double eps)
    : width(w), height(h), spacing(eps) {
    if (w < 3 || h < 3)
        throw std::invalid_argument("GridGeometry: width and height must be >= 3, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("GridGeometry: spacing must be positive and finite");
}

ScalarField::ScalarField(const GridGeometry& g, double fill)
    : geom(g), values(g.nodes(), fill) {}

ScalarField make_field(const GridGeometry& g, double fill) {
    if (!std::isfinite(fill))
        throw std::invalid_argument("make_field: fill value must be finite");
    return ScalarField(g, fill);
}

ScalarField difference_op(const ScalarField& u, StencilVector z) {
    ScalarField out(u.geom, 0.0);
    const int w = u.geom.width, h = u.geom.height;
    const double inv_eps = 1.0 / u.geom.spacing;
    for (int y = 0; y < h; ++y) {
        const int yn = y + z.dy;
        if (yn < 0 || yn >= h) continue;
        for (int x = 0; x < w; ++x) {
            const int xn = x + z.dx;
            if (xn < 0 || xn >= w) continue;
            out.at(x, y) = (u.at(xn, yn) - u.at(x, y)) * inv_eps;
        }
    }
    return out;
}

double l2_norm(const ScalarField& v) {
    double s = 0.0;
    for (double t : v.values) s += t * t;
    return v.geom.spacing * std::sqrt(s);
}

double sobolev_seminorm(const ScalarField& u, const std::vector<StencilVector>& lambda) {
    if (lambda.empty())
        throw std::invalid_argument("sobolev_seminorm: empty stencil family");
    double s = 0.0;
    for (const StencilVector& z : lambda) {
        ScalarField d = difference_op(u, z);
        for (double t : d.values) s += t * t;
    }
    return u.geom.spacing * std::sqrt(s);
}

double mesh_completion(const ScalarField& u, double px, double py) {
    const double eps = u.geom.spacing;
    const int ix = static_cast<int>(std::floor(px / eps + 0.5));
    const int iy = static_cast<int>(std::floor(py / eps + 0.5));
    if (!u.contains(ix, iy))
        throw std::domain_error("mesh_completion: point (" + std::to_string(px) + ", " +
                                std::to_string(py) + ") outside the grid bounding box");
    return u.at(ix, iy);
}

double field_mean(const ScalarField& u) {
    double s = 0.0;
    for (double t : u.values) s += t;
    return s / static_cast<double>(u.values.size());
}

double field_min(const ScalarField& u) {
    return *std::min_element(u.values.begin(), u.values.end());
}

double field_max(const ScalarField& u) {
    return *std::max_element(u.values.begin(), u.values.end());
}

}
