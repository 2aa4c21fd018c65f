#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetpde/grid.hpp"

namespace hetpde {

// Conductance sample on an integer window of unit cells: each cell holds
// delta with probability r, otherwise 1.
struct KappaField {
    int width = 0;
    int height = 0;
    double r = 0.0;
    double delta = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

KappaField sample_kappa(int width, int height, double r, double delta, std::uint64_t seed);

// Random-walk transition weights built from kappa:
//   p_z(x) = 2 k(x) k(x+z) / (4 (k(x) + k(x+z)))   for z != 0,
//   p_0(x) = 1 - sum of the others.
// Fields live on the window nodes with the given spacing; entries whose
// neighbour leaves the window are 0 and excluded from every check and solve.
struct TransitionOperator {
    std::vector<StencilVector> lambda;  // zero vector always present (last)
    std::vector<ScalarField> p;         // aligned with lambda
    double epsilon = 1.0;
    double delta_min = 0.0;  // attained min of p over +-e1, +-e2

    const GridGeometry& geom() const { return p.front().geom; }
    bool interior(int x, int y) const;
};

// lambda must be symmetric and contain +-e1, +-e2; the zero vector is
// appended when missing. Diagonal vectors are accepted.
TransitionOperator transition_functions(const KappaField& kappa,
                                        const std::vector<StencilVector>& lambda,
                                        double epsilon);

std::vector<StencilVector> default_lambda();

struct MeanValueValidation {
    bool stochastic = false;      // p >= 0 and rows sum to 1
    double worst_sum_error = 0.0;
    bool elliptic = false;        // p_{+-e_i} >= delta_min > 0
    double delta_min = 0.0;
    bool reversible = false;      // p_z(x) == p_{-z}(x+z)
    double worst_reversibility = 0.0;
    bool passed = false;
};

MeanValueValidation validate_mean_value(const TransitionOperator& op, double tol = 1e-12);

// Damped Jacobi sweeps of u <- sum_z p_z u(.+eps z) + eps^2 f with zero
// boundary data, run until l2_norm(residual) < target_residual. Throws
// std::runtime_error when max_iterations sweeps are not enough.
ScalarField solve_mean_value_dirichlet(const TransitionOperator& op, const ScalarField& f,
                                       double target_residual = 1e-8, double damping = 0.8,
                                       long max_iterations = 2000000);

// Zero-boundary forcing term amplitude * sin(pi m x) * sin(pi n y) on the
// unit square.
struct SineMode {
    int m = 1;
    int n = 1;
    double amplitude = 0.0;
};

std::vector<SineMode> default_forcing();

struct HomogenizationParams {
    std::vector<double> epsilons;        // strictly decreasing, each 1/integer
    double r = 0.5;
    double delta = 0.1;
    std::vector<std::uint64_t> seeds;    // one per epsilon
    std::vector<SineMode> forcing;       // empty selects default_forcing()
    int reference_cells = 256;           // comparison grid resolution
};

struct HomogenizationReport {
    std::vector<double> epsilon_sequence;
    std::vector<double> l2_errors;            // distance to the per-eps scalar fit
    std::vector<double> fitted_per_epsilon;   // scalar coefficient per eps
    std::vector<double> anisotropy_per_epsilon;
    double fitted_coefficient = 0.0;   // scalar fit at the finest eps
    double anisotropy_estimate = 1.0;  // diagonal-fit ratio at the finest eps
};

// For each epsilon: sample kappa on the scaled window, build transitions,
// validate, solve the mean-value problem on the unit square, mesh-complete
// onto the reference grid and fit the constant-coefficient model
// -a0 Lap u = f; additionally fit a diagonal matrix diag(ax, ay) and report
// ax / ay.
HomogenizationReport h_convergence_experiment(const HomogenizationParams& params);

// Rows "epsilon,l2_error,fitted_a0,anisotropy".
void write_homogenization_csv(const std::string& path, const HomogenizationReport& report);

}
