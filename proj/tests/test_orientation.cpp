#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hetpde/grid.hpp"
#include "hetpde/orientation.hpp"

using namespace hetpde;

namespace {

constexpr double pi = std::numbers::pi;

// distance between orientations, shortest way around the half-circle
double circ_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), pi);
    return std::min(d, pi - d);
}

bool in_range(const OrientationMap& m) {
    for (double t : m.theta)
        if (!(t >= 0.0 && t < pi)) return false;
    return true;
}

}  // namespace

TEST_CASE("constant maps reduce modulo pi") {
    GridGeometry g(8, 6, 1.0);
    for (double t : constant_map(g, 0.0).theta) CHECK(t == 0.0);
    for (double t : constant_map(g, pi).theta) CHECK(t == doctest::Approx(0.0).epsilon(1e-15));
    for (double t : constant_map(g, pi / 2).theta) CHECK(t == pi / 2);
}

TEST_CASE("orientation reduction") {
    CHECK(reduce_orientation(0.0) == 0.0);
    CHECK(reduce_orientation(pi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(reduce_orientation(3 * pi / 2) == doctest::Approx(pi / 2).epsilon(1e-14));
    CHECK(reduce_orientation(-pi / 4) == doctest::Approx(3 * pi / 4).epsilon(1e-14));
    CHECK(reduce_orientation(0.3) == 0.3);
}

TEST_CASE("single-mode pinwheel sweeps linearly along x") {
    GridGeometry g(16, 5, 1.0);
    PinwheelParams params;
    params.n_samples = 1;
    params.seed = 9;
    params.frequency_scale = 0.23;  // clear of exact multiples of pi
    OrientationMap m = pinwheel_map(g, params);
    CHECK(in_range(m));
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            double expect = reduce_orientation(2.0 * pi * 0.23 * x);
            CHECK(circ_dist(m.at(x, y), expect) < 1e-9);
        }
}

TEST_CASE("pinwheel determinism and range") {
    GridGeometry g(32, 32, 1.0);
    PinwheelParams params;
    params.seed = 4;
    OrientationMap a = pinwheel_map(g, params);
    OrientationMap b = pinwheel_map(g, params);
    CHECK(a.theta == b.theta);
    CHECK(in_range(a));
    params.n_samples = 0;
    CHECK_THROWS_AS(pinwheel_map(g, params), std::invalid_argument);
}

TEST_CASE("pinwheels carry singularities") {
    GridGeometry g(64, 64, 1.0);
    int with_singularity = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PinwheelParams params;
        params.seed = seed;  // default frequency scale, a handful of pinwheels
        OrientationMap m = pinwheel_map(g, params);
        bool found = false;
        for (int y = 0; y + 1 < g.height && !found; ++y)
            for (int x = 0; x + 1 < g.width && !found; ++x) found = plaquette_singular(m, x, y);
        with_singularity += found;
    }
    CHECK(with_singularity >= 8);
}

TEST_CASE("salt and pepper maps") {
    GridGeometry g(64, 64, 1.0);
    OrientationMap a = salt_pepper_map(g, 5);
    CHECK(a.theta == salt_pepper_map(g, 5).theta);
    CHECK(in_range(a));

    OrientationMap b = salt_pepper_map(g, 6);
    std::size_t equal = 0;
    for (std::size_t i = 0; i < a.theta.size(); ++i) equal += a.theta[i] == b.theta[i];
    CHECK(equal <= a.theta.size() / 100);
}

TEST_CASE("binary horizontal/vertical maps") {
    GridGeometry g(128, 128, 1.0);
    for (double t : binary_hv_map(g, 1.0, 3).theta) CHECK(t == 0.0);
    for (double t : binary_hv_map(g, 0.0, 3).theta) CHECK(t == pi / 2);

    OrientationMap m = binary_hv_map(g, 0.5, 3);
    CHECK(m.theta == binary_hv_map(g, 0.5, 3).theta);
    std::size_t zeros = 0;
    for (double t : m.theta) {
        CHECK((t == 0.0 || t == pi / 2));
        zeros += t == 0.0;
    }
    double frac = double(zeros) / double(m.theta.size());
    CHECK(frac >= 0.45);
    CHECK(frac <= 0.55);

    CHECK_THROWS_AS(binary_hv_map(g, -0.1, 3), std::invalid_argument);
    CHECK_THROWS_AS(binary_hv_map(g, 1.1, 3), std::invalid_argument);
}
