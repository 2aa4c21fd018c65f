#pragma once

#include <stdexcept>
#include <string>

namespace hetpde {

// File or stream level failure (missing file, bad magic, short read, ...).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by the explicit time stepper when the iteration blows up.
// Carries the iteration at which the blow-up was detected.
struct InstabilityError : std::runtime_error {
    int iteration;
    InstabilityError(const std::string& what, int iter)
        : std::runtime_error(what), iteration(iter) {}
};

// A transition operator failed its required stochasticity, ellipticity or
// reversibility checks.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}
