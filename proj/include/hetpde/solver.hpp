#pragma once

#include <vector>

#include "hetpde/operators.hpp"

namespace hetpde {

enum class BoundaryMode { neumann, dirichlet_zero };

struct SolverConfig {
    // 0 picks default_dt(op).
    double dt = 0.0;
    // Stopping threshold for the unweighted absolute update sum
    // sum_x |u_{k+1}(x) - u_k(x)|.
    double tolerance = 1e-4;
    long max_iterations = 2000000;
    BoundaryMode boundary = BoundaryMode::neumann;
    bool record_energy = false;
};

struct SolveReport {
    ScalarField solution;
    long iterations = 0;
    double final_update_sum = 0.0;
    // energy after each step, preceded by the energy of the initial state;
    // filled only when record_energy is set.
    std::vector<double> energy_trace;
    bool converged = false;
};

// 0.1 when the a3 branch is empty, 0.001 otherwise.
double default_dt(const HeterogeneousOperator& op);

// Explicit Euler u <- u + dt * (apply(op, u) - f) from u0 = 0.
// Stops when the update sum drops below config.tolerance. Throws
// InstabilityError when a state stops being finite or the update sum
// exceeds 1e12.
SolveReport solve(const HeterogeneousOperator& op, const ScalarField& f,
                  const SolverConfig& config);
SolveReport solve(const HeterogeneousOperator& op, const ScalarField& f, const ScalarField& u0,
                  const SolverConfig& config);

// Lightness reconstruction: drives u toward the solution of
// apply(op, u) = forward_output(op, stimulus, g), then shifts the result so
// its mean matches the stimulus mean.
SolveReport reconstruct(const HeterogeneousOperator& op, const ScalarField& stimulus,
                        const GaussianParams& g, const SolverConfig& config);

}
