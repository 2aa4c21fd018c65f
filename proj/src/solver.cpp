#include "hetpde/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hetpde/errors.hpp"

namespace hetpde {

double default_dt(const HeterogeneousOperator& op) {
    return op.has_a3 ? 0.001 : 0.1;
}

namespace {

void zero_boundary_ring(ScalarField& u) {
    const int w = u.geom.width, h = u.geom.height;
    for (int x = 0; x < w; ++x) {
        u.at(x, 0) = 0.0;
        u.at(x, h - 1) = 0.0;
    }
    for (int y = 0; y < h; ++y) {
        u.at(0, y) = 0.0;
        u.at(w - 1, y) = 0.0;
    }
}

}  // namespace

SolveReport solve(const HeterogeneousOperator& op, const ScalarField& f, const ScalarField& u0,
                  const SolverConfig& config) {
    if (!(f.geom == op.geom()) || !(u0.geom == op.geom()))
        throw std::invalid_argument("solve: geometry mismatch");
    if (config.dt < 0.0 || !std::isfinite(config.dt))
        throw std::invalid_argument("solve: dt must be positive (0 picks the default)");
    const double dt = config.dt > 0.0 ? config.dt : default_dt(op);
    if (!(config.tolerance > 0.0))
        throw std::invalid_argument("solve: tolerance must be positive");
    if (config.max_iterations < 1)
        throw std::invalid_argument("solve: max_iterations must be >= 1");

    const bool dirichlet = config.boundary == BoundaryMode::dirichlet_zero;
    const int w = op.geom().width, h = op.geom().height;

    SolveReport report;
    ScalarField u = u0;
    if (dirichlet) zero_boundary_ring(u);
    ScalarField lu(u.geom);
    ApplyWorkspace ws;

    if (config.record_energy) report.energy_trace.push_back(energy(op, u, f));

    for (long k = 1; k <= config.max_iterations; ++k) {
        apply_into(op, u, lu, ws);
        double update_sum = 0.0;
        if (dirichlet) {
            for (int y = 1; y < h - 1; ++y)
                for (int x = 1; x < w - 1; ++x) {
                    const size_t i = u.idx(x, y);
                    const double du = dt * (lu.values[i] - f.values[i]);
                    u.values[i] += du;
                    update_sum += std::abs(du);
                }
        } else {
            for (size_t i = 0; i < u.values.size(); ++i) {
                const double du = dt * (lu.values[i] - f.values[i]);
                u.values[i] += du;
                update_sum += std::abs(du);
            }
        }

        if (!std::isfinite(update_sum) || update_sum > 1e12)
            throw InstabilityError(
                "solve: iteration diverged at step " + std::to_string(k) +
                    " (update sum " + std::to_string(update_sum) + ")",
                static_cast<int>(k));

        if (config.record_energy) report.energy_trace.push_back(energy(op, u, f));

        report.iterations = k;
        report.final_update_sum = update_sum;
        if (update_sum < config.tolerance) {
            report.converged = true;
            break;
        }
    }

    report.solution = std::move(u);
    return report;
}

SolveReport solve(const HeterogeneousOperator& op, const ScalarField& f,
                  const SolverConfig& config) {
    return solve(op, f, ScalarField(op.geom(), 0.0), config);
}

SolveReport reconstruct(const HeterogeneousOperator& op, const ScalarField& stimulus,
                        const GaussianParams& g, const SolverConfig& config) {
    const ScalarField f = forward_output(op, stimulus, g);
    SolveReport report = solve(op, f, config);
    const double shift = field_mean(stimulus) - field_mean(report.solution);
    for (double& v : report.solution.values) v += shift;
    return report;
}

}
