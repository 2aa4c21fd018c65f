#pragma once

#include <cstdint>
#include <string>

#include "hetpde/grid.hpp"
#include "hetpde/orientation.hpp"

namespace hetpde {

// Branch weights of the operator, one field per branch:
//   a1 -> isotropic second order
//   a2 -> directional second order
//   a3 -> directional higher order (order set by beta)
// Sampled partitions are {0,1}-valued with exactly one active branch per
// node; general nonnegative bounded weights are accepted as well.
struct CoefficientField {
    ScalarField a1, a2, a3;

    CoefficientField() = default;
    CoefficientField(ScalarField a1_, ScalarField a2_, ScalarField a3_);

    const GridGeometry& geom() const { return a1.geom; }
    bool is_partition(double tol = 0.0) const;
};

// One branch active everywhere: which in {1, 2, 3}.
CoefficientField pure_coefficients(const GridGeometry& g, int which);

// Per node, independently: branch i active with probability p_i.
CoefficientField sample_partition(const GridGeometry& g, double p1, double p2, double p3,
                                  std::uint64_t seed);

struct GaussianParams {
    double sigma = 1.0;
    double truncation_radius = 3.0;  // kernel half-width in sigma units
};

// a1 * Lap + a2 * D2_theta + a3 * (beta == 1 ? D2_theta : -D4_theta),
// where D2_theta is the second derivative along (cos theta, sin theta) and
// D4_theta its square. Coefficients multiply the branch outputs nodewise.
struct HeterogeneousOperator {
    OrientationMap theta;
    CoefficientField coeffs;
    int beta = 2;

    HeterogeneousOperator() = default;
    HeterogeneousOperator(OrientationMap theta_, CoefficientField coeffs_, int beta_ = 2);

    const GridGeometry& geom() const { return theta.geom; }

    bool has_a1 = false, has_a2 = false, has_a3 = false;
    // Cached per-node cos^2, sin^2, cos*sin of theta.
    std::vector<double> cos2, sin2, cossin;
};

// Reusable scratch buffers for repeated applications.
struct ApplyWorkspace {
    ScalarField lap, d2, d4;
};

// 5-point Laplacian. All stencils in this module close the grid with
// reflected ghost cells (ghost = nearest edge cell), which keeps the matrices
// symmetric and realizes the zero-flux boundary.
ScalarField laplacian(const ScalarField& u);

// cos^2 D11 + 2 cos sin D12 + sin^2 D22 with the centered four-corner mixed
// stencil.
ScalarField directional_second(const ScalarField& u, const OrientationMap& theta);

// directional_second applied twice with the same theta field.
ScalarField directional_fourth(const ScalarField& u, const OrientationMap& theta);

ScalarField apply(const HeterogeneousOperator& op, const ScalarField& u);
void apply_into(const HeterogeneousOperator& op, const ScalarField& u, ScalarField& out,
                ApplyWorkspace& ws);

// Truncated, renormalized, separable Gaussian. Tap half-width is
// floor(truncation_radius * sigma) cells; a half-width of zero returns the
// input unchanged.
ScalarField gaussian_smooth(const ScalarField& u, const GaussianParams& g);

ScalarField forward_output(const HeterogeneousOperator& op, const ScalarField& stimulus,
                           const GaussianParams& g);

// Discrete functional whose gradient flow is u' = apply(op, u) - f. Built as
// the exact discrete potential of the stencils above: quadratic terms use
// forward differences for the axis parts, the centered product for the mixed
// part, plus the linear coupling sum f*u. Weighted by eps^2.
double energy(const HeterogeneousOperator& op, const ScalarField& u, const ScalarField& f);

// Short text digest of an operator (geometry, beta, branch occupancies,
// theta range), used for provenance records.
std::string describe(const HeterogeneousOperator& op);

}
