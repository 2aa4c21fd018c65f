#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hetpde/grid.hpp"
#include "hetpde/random.hpp"

using namespace hetpde;

namespace {

ScalarField random_field(const GridGeometry& g, std::uint64_t seed, bool zero_ring = false) {
    std::mt19937_64 rng(seed);
    ScalarField u(g);
    for (double& v : u.values) v = 2.0 * uniform_unit(rng) - 1.0;
    if (zero_ring) {
        for (int x = 0; x < g.width; ++x) u.at(x, 0) = u.at(x, g.height - 1) = 0.0;
        for (int y = 0; y < g.height; ++y) u.at(0, y) = u.at(g.width - 1, y) = 0.0;
    }
    return u;
}

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

}  // namespace

TEST_CASE("field construction and fill") {
    GridGeometry g(4, 4, 1.0);
    CHECK(g.nodes() == 16);
    ScalarField zero = make_field(g, 0.0);
    ScalarField one = make_field(g, 1.0);
    for (double v : zero.values) CHECK(v == 0.0);
    for (double v : one.values) CHECK(v == 1.0);
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(GridGeometry(2, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridGeometry(8, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridGeometry(8, 8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GridGeometry(8, 8, -1.0), std::invalid_argument);
}

TEST_CASE("difference of a constant is zero") {
    GridGeometry g(5, 4, 1.0);
    ScalarField u = make_field(g, 3.25);
    for (StencilVector z : {StencilVector{1, 0}, StencilVector{0, 1}, StencilVector{-2, 1}}) {
        ScalarField d = difference_op(u, z);
        for (double v : d.values) CHECK(v == 0.0);
    }
}

TEST_CASE("difference of a linear ramp") {
    GridGeometry g(5, 4, 1.0);
    ScalarField u(g);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) u.at(x, y) = double(x);
    ScalarField d = difference_op(u, {1, 0});
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(d.at(x, y) == 1.0);
        CHECK(d.at(4, y) == 0.0);  // neighbour leaves the grid
    }
}

TEST_CASE("difference of a delta") {
    GridGeometry g(4, 4, 1.0);
    ScalarField u(g);
    u.at(2, 2) = 1.0;
    ScalarField d = difference_op(u, {1, 0});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            double expect = (x == 2 && y == 2) ? -1.0 : (x == 1 && y == 2) ? 1.0 : 0.0;
            CHECK(d.at(x, y) == expect);
        }
}

TEST_CASE("difference scales with spacing") {
    GridGeometry g(5, 4, 0.5);
    ScalarField u(g);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) u.at(x, y) = 0.5 * x;  // physical coordinate
    ScalarField d = difference_op(u, {1, 0});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(d.at(x, y) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("difference is linear") {
    GridGeometry g(6, 5, 1.0);
    ScalarField u = random_field(g, 11), v = random_field(g, 12);
    double a = 1.7, b = -0.4;
    ScalarField w(g);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = a * u.values[i] + b * v.values[i];
    for (StencilVector z : {StencilVector{1, 0}, StencilVector{1, 1}}) {
        ScalarField dw = difference_op(w, z);
        ScalarField du = difference_op(u, z), dv = difference_op(v, z);
        for (std::size_t i = 0; i < w.values.size(); ++i)
            CHECK(dw.values[i] ==
                  doctest::Approx(a * du.values[i] + b * dv.values[i]).epsilon(1e-13));
    }
}

TEST_CASE("summation by parts against the reversed stencil") {
    GridGeometry g(9, 7, 0.5);
    // Support must stay a full stencil reach away from the boundary, or the
    // off-grid zero fill breaks the adjoint pairing.
    auto zero_margin = [](ScalarField f, int m) {
        for (int y = 0; y < f.geom.height; ++y)
            for (int x = 0; x < f.geom.width; ++x)
                if (x < m || y < m || x >= f.geom.width - m || y >= f.geom.height - m)
                    f.at(x, y) = 0.0;
        return f;
    };
    for (StencilVector z :
         {StencilVector{1, 0}, StencilVector{0, 1}, StencilVector{1, 1}, StencilVector{2, -1}}) {
        const int m = std::max(std::abs(z.dx), std::abs(z.dy));
        ScalarField u = zero_margin(random_field(g, 21), m);
        ScalarField v = zero_margin(random_field(g, 22), m);
        double lhs = dot(difference_op(u, z), v);
        double rhs = dot(u, difference_op(v, {-z.dx, -z.dy}));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("l2 norm values and spacing factor") {
    GridGeometry unit(4, 4, 1.0), half(4, 4, 0.5);
    CHECK(l2_norm(make_field(unit, 1.0)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(l2_norm(make_field(half, 1.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(l2_norm(make_field(unit, 0.0)) == 0.0);

    ScalarField a = random_field(unit, 31);
    ScalarField b(GridGeometry(4, 4, 2.0));
    b.values = a.values;
    CHECK(l2_norm(b) == doctest::Approx(2.0 * l2_norm(a)).epsilon(1e-14));
}

TEST_CASE("sobolev seminorm") {
    GridGeometry g(5, 4, 1.0);
    CHECK(sobolev_seminorm(make_field(g, 2.0), {{1, 0}, {0, 1}}) == 0.0);

    ScalarField ramp(g);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) ramp.at(x, y) = double(x);
    // each of the (width-1) x height cells with an in-grid neighbour adds 1
    CHECK(sobolev_seminorm(ramp, {{1, 0}}) == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS(sobolev_seminorm(ramp, {}), std::invalid_argument);
}

TEST_CASE("mesh completion half-open cells") {
    GridGeometry g(4, 3, 2.0);  // spacing 2
    ScalarField u(g);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) u.at(x, y) = 10.0 * y + x;

    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) CHECK(mesh_completion(u, 2.0 * x, 2.0 * y) == u.at(x, y));

    CHECK(mesh_completion(u, 2.0 + 0.49 * 2.0, 0.0) == u.at(1, 0));
    CHECK(mesh_completion(u, 2.0 + 0.5 * 2.0, 0.0) == u.at(2, 0));
    CHECK(mesh_completion(u, 0.0, 2.0 - 0.51 * 2.0) == u.at(0, 0));

    CHECK_THROWS_AS(mesh_completion(u, -0.51 * 2.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(mesh_completion(u, 3 * 2.0 + 0.5 * 2.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(mesh_completion(u, 0.0, 2 * 2.0 + 0.5 * 2.0), std::domain_error);
}

TEST_CASE("field statistics") {
    GridGeometry g(4, 4, 1.0);
    ScalarField u(g);
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = double(i);
    CHECK(field_mean(u) == doctest::Approx(7.5).epsilon(1e-15));
    CHECK(field_min(u) == 0.0);
    CHECK(field_max(u) == 15.0);
}
