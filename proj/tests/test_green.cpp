#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "hetpde/green.hpp"
#include "hetpde/grid.hpp"
#include "hetpde/operators.hpp"
#include "hetpde/orientation.hpp"
#include "hetpde/random.hpp"
#include "hetpde/solver.hpp"

using namespace hetpde;

namespace {

HeterogeneousOperator pure_op(const GridGeometry& g, int which, double theta, int beta = 2) {
    return HeterogeneousOperator(constant_map(g, theta), pure_coefficients(g, which), beta);
}

// synthetic impulse response peaked at the source: field = -profile so that
// -field matches the profile the anisotropy measure looks at
GreenFunction synthetic(const GridGeometry& g, int sx, int sy, double qx, double qy) {
    GreenFunction gf;
    gf.source_x = sx;
    gf.source_y = sy;
    gf.field = ScalarField(g);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            double px = (x - sx) * g.spacing, py = (y - sy) * g.spacing;
            gf.field.at(x, y) = -std::exp(-(qx * px * px + qy * py * py));
        }
    return gf;
}

}  // namespace

TEST_CASE("anisotropy of synthetic profiles") {
    GridGeometry g(81, 81, 0.1);
    double round = anisotropy_ratio(synthetic(g, 40, 40, 1.0, 1.0), 0.5);
    CHECK(round == doctest::Approx(1.0).epsilon(0.05));

    double stretched = anisotropy_ratio(synthetic(g, 40, 40, 1.0, 25.0), 0.5);
    CHECK(stretched == doctest::Approx(5.0).epsilon(0.15));

    CHECK_THROWS_AS(anisotropy_ratio(synthetic(g, 40, 40, 1.0, 1.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(anisotropy_ratio(synthetic(g, 40, 40, 1.0, 1.0), 1.0), std::invalid_argument);
}

TEST_CASE("log profile fit recovers a planted kernel") {
    GridGeometry g(41, 41, 1.0);
    GreenFunction gf;
    gf.source_x = 20;
    gf.source_y = 20;
    gf.field = ScalarField(g);
    for (int y = 0; y < 41; ++y)
        for (int x = 0; x < 41; ++x) {
            double r = std::hypot(double(x - 20), double(y - 20));
            gf.field.at(x, y) = r < 0.5 ? -3.0 : 0.37 * std::log(r) - 1.1;
        }
    LogFit fit = fit_log_profile(gf, 3.0, 12.0);
    CHECK(fit.alpha == doctest::Approx(0.37).epsilon(1e-10));
    CHECK(fit.beta == doctest::Approx(-1.1).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("isotropic impulse response is round and zero mean") {
    GridGeometry g(33, 33, 1.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.tolerance = 1e-6;
    GreenFunction gf = green(pure_op(g, 1, 0.0), 16, 16, cfg);
    CHECK(gf.converged);
    CHECK(gf.iterations > 0);
    CHECK(!gf.operator_digest.empty());
    CHECK(std::abs(field_mean(gf.field)) < 1e-12);

    // the dip sits at the source
    CHECK(field_min(gf.field) == gf.field.at(16, 16));
    CHECK(anisotropy_ratio(gf, 0.5) < 1.2);

    // values on a fixed mid-radius circle stay within 10% of the local
    // radial range (bilinear samples so lattice rounding does not intrude)
    auto sample = [&](double px, double py) {
        int x0 = int(std::floor(px)), y0 = int(std::floor(py));
        double tx = px - x0, ty = py - y0;
        return (1 - tx) * (1 - ty) * gf.field.at(x0, y0) +
               tx * (1 - ty) * gf.field.at(x0 + 1, y0) +
               (1 - tx) * ty * gf.field.at(x0, y0 + 1) + tx * ty * gf.field.at(x0 + 1, y0 + 1);
    };
    for (double r : {4.0, 6.0, 9.0}) {
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < 64; ++k) {
            double a = 2.0 * M_PI * k / 64.0;
            double v = sample(16 + r * std::cos(a), 16 + r * std::sin(a));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double radial = std::abs(sample(16 + r - 1, 16.0) - sample(16 + r + 1, 16.0));
        CHECK(hi - lo < 0.10 * radial);
    }
}

TEST_CASE("sources must stay clear of the boundary") {
    GridGeometry g(11, 11, 1.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.max_iterations = 5;
    CHECK_THROWS_AS(green(pure_op(g, 1, 0.0), 0, 5, cfg), std::invalid_argument);
    CHECK_NOTHROW(green(pure_op(g, 1, 0.0), 1, 5, cfg));
    // the fourth-order stencil reaches two cells
    SolverConfig tiny;
    tiny.dt = 0.001;
    tiny.max_iterations = 5;
    CHECK_THROWS_AS(green(pure_op(g, 3, 0.3), 1, 5, tiny), std::invalid_argument);
    CHECK_NOTHROW(green(pure_op(g, 3, 0.3), 2, 5, tiny));
}

TEST_CASE("kernel symmetry for self-adjoint configurations") {
    GridGeometry g(11, 11, 1.0);

    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.tolerance = 1e-10;
    GreenFunction a = green(pure_op(g, 1, 0.0), 3, 4, cfg);
    GreenFunction b = green(pure_op(g, 1, 0.0), 5, 6, cfg);
    double scale = std::max(std::abs(field_min(a.field)), std::abs(field_max(a.field)));
    CHECK(std::abs(a.field.at(5, 6) - b.field.at(3, 4)) < 1e-6 * scale);

    // the row-aligned operator has no steady state; equal step counts still
    // give a symmetric kernel because the evolution matrix is symmetric
    SolverConfig capped;
    capped.dt = 0.1;
    capped.max_iterations = 20000;
    GreenFunction c = green(pure_op(g, 2, 0.0), 3, 4, capped);
    GreenFunction d = green(pure_op(g, 2, 0.0), 5, 6, capped);
    double scale_c = std::max(std::abs(field_min(c.field)), std::abs(field_max(c.field)));
    CHECK(std::abs(c.field.at(5, 6) - d.field.at(3, 4)) < 1e-6 * scale_c);
}

TEST_CASE("superposition over the full source set matches a direct solve") {
    GridGeometry g(9, 9, 1.0);
    HeterogeneousOperator op = pure_op(g, 1, 0.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    cfg.tolerance = 1e-8;

    std::vector<GreenFunction> greens;
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) greens.push_back(green(op, x, y, cfg));

    std::mt19937_64 rng(5);
    ScalarField f(g);
    double sum = 0.0;
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) {
            f.at(x, y) = uniform_unit(rng) - 0.5;
            sum += f.at(x, y);
        }
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) f.at(x, y) -= sum / 49.0;

    ScalarField direct = solve(op, f, cfg).solution;
    ScalarField super = green_superposition(greens, f);
    double shift = field_mean(direct) - field_mean(super);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < direct.values.size(); ++i) {
        double d = super.values[i] + shift - direct.values[i];
        err += d * d;
        norm += direct.values[i] * direct.values[i];
    }
    CHECK(std::sqrt(err / norm) < 0.02);
}

TEST_CASE("level lines of a ramp are vertical polylines") {
    GridGeometry g(7, 5, 1.0);
    ScalarField u(g);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) u.at(x, y) = double(x);
    std::vector<Polyline> lines = level_lines(u, 8);
    CHECK(lines.size() == 8);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const Polyline& line = lines[i];
        // one chained line crossing every cell row
        CHECK(line.points.size() == std::size_t(g.height));
        for (const auto& p : line.points)
            CHECK(p.first == doctest::Approx(line.level).epsilon(1e-12));
        if (i > 0) CHECK(line.level > lines[i - 1].level);
    }
}

TEST_CASE("polyline export") {
    GridGeometry g(7, 5, 1.0);
    ScalarField u(g);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) u.at(x, y) = double(x);
    auto path = std::filesystem::temp_directory_path() / "hetpde_test_contours.csv";
    write_polylines_csv(path.string(), level_lines(u, 4));
    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "level,polyline,x,y");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 4 * 5);
    std::filesystem::remove(path);
}
