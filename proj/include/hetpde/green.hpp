#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hetpde/solver.hpp"

namespace hetpde {

// Zero-mean impulse response of an operator for one source node.
struct GreenFunction {
    int source_x = 0;
    int source_y = 0;
    ScalarField field;
    std::string operator_digest;
    long iterations = 0;
    bool converged = false;
};

// Solves apply(op, G) = delta_source - mean(delta_source) with zero-flux
// boundaries and shifts the result to zero mean. The source must stay clear
// of the boundary by the stencil reach (two cells when the fourth-order
// branch is present, one otherwise).
GreenFunction green(const HeterogeneousOperator& op, int source_x, int source_y,
                    const SolverConfig& config);

// Spread measure of -G around the source: extents of the superlevel set
// {-G >= min + level_fraction * range} along 8 directions through the
// source (bilinear sampling), returned as max extent / min extent.
// Throws std::runtime_error when the level set is degenerate.
double anisotropy_ratio(const GreenFunction& gf, double level_fraction);

// u(x) = eps^2 * sum_s field_s(x) * f(source_s); by kernel symmetry this is
// the superposition solution for a right-hand side f supported on the listed
// sources.
ScalarField green_superposition(const std::vector<GreenFunction>& greens, const ScalarField& f);

struct LogFit {
    double alpha = 0.0;   // slope against log r
    double beta = 0.0;    // intercept
    double r_squared = 0.0;
};

// Least-squares fit of the Green values against alpha * log(r) + beta over
// nodes with source distance in [r_min, r_max] (node units).
LogFit fit_log_profile(const GreenFunction& gf, double r_min, double r_max);

struct Polyline {
    double level = 0.0;
    std::vector<std::pair<double, double>> points;  // physical coordinates
};

// Marching-squares contours at n_levels evenly spaced interior levels.
std::vector<Polyline> level_lines(const ScalarField& u, int n_levels = 8);

// Rows "level,polyline,x,y" with a header line.
void write_polylines_csv(const std::string& path, const std::vector<Polyline>& lines);

}
