#include "hetpde/operators.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hetpde/random.hpp"

namespace hetpde {

namespace {

// Reflect an index across the grid faces (ghost = nearest edge cell).
inline int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

bool field_nonzero(const ScalarField& f) {
    for (double v : f.values)
        if (v != 0.0) return true;
    return false;
}

void check_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": geometry mismatch");
}

}  // namespace

CoefficientField::CoefficientField(ScalarField a1_, ScalarField a2_, ScalarField a3_)
    : a1(std::move(a1_)), a2(std::move(a2_)), a3(std::move(a3_)) {
    check_same_geometry(a1.geom, a2.geom, "CoefficientField");
    check_same_geometry(a1.geom, a3.geom, "CoefficientField");
    for (size_t i = 0; i < a1.values.size(); ++i) {
        const double v1 = a1.values[i], v2 = a2.values[i], v3 = a3.values[i];
        if (!(std::isfinite(v1) && std::isfinite(v2) && std::isfinite(v3)) || v1 < 0.0 ||
            v2 < 0.0 || v3 < 0.0)
            throw std::invalid_argument("CoefficientField: weights must be finite and >= 0");
    }
}

bool CoefficientField::is_partition(double tol) const {
    for (size_t i = 0; i < a1.values.size(); ++i) {
        const double v[3] = {a1.values[i], a2.values[i], a3.values[i]};
        int ones = 0;
        for (double t : v) {
            if (std::abs(t - 1.0) <= tol)
                ++ones;
            else if (std::abs(t) > tol)
                return false;
        }
        if (ones != 1) return false;
    }
    return true;
}

CoefficientField pure_coefficients(const GridGeometry& g, int which) {
    if (which < 1 || which > 3)
        throw std::invalid_argument("pure_coefficients: branch must be 1, 2 or 3");
    ScalarField a1(g), a2(g), a3(g);
    ScalarField* sel[3] = {&a1, &a2, &a3};
    for (double& v : sel[which - 1]->values) v = 1.0;
    return CoefficientField(std::move(a1), std::move(a2), std::move(a3));
}

CoefficientField sample_partition(const GridGeometry& g, double p1, double p2, double p3,
                                  std::uint64_t seed) {
    if (p1 < 0.0 || p2 < 0.0 || p3 < 0.0 || std::abs(p1 + p2 + p3 - 1.0) > 1e-9)
        throw std::invalid_argument("sample_partition: probabilities must be >= 0 and sum to 1");
    std::mt19937_64 rng(seed);
    ScalarField a1(g), a2(g), a3(g);
    for (size_t i = 0; i < a1.values.size(); ++i) {
        const double u = uniform_unit(rng);
        if (u < p1)
            a1.values[i] = 1.0;
        else if (u < p1 + p2)
            a2.values[i] = 1.0;
        else
            a3.values[i] = 1.0;
    }
    return CoefficientField(std::move(a1), std::move(a2), std::move(a3));
}

HeterogeneousOperator::HeterogeneousOperator(OrientationMap theta_, CoefficientField coeffs_,
                                             int beta_)
    : theta(std::move(theta_)), coeffs(std::move(coeffs_)), beta(beta_) {
    if (beta != 1 && beta != 2)
        throw std::invalid_argument("HeterogeneousOperator: beta must be 1 or 2");
    check_same_geometry(theta.geom, coeffs.geom(), "HeterogeneousOperator");
    has_a1 = field_nonzero(coeffs.a1);
    has_a2 = field_nonzero(coeffs.a2);
    has_a3 = field_nonzero(coeffs.a3);
    cos2.resize(theta.theta.size());
    sin2.resize(theta.theta.size());
    cossin.resize(theta.theta.size());
    for (size_t i = 0; i < theta.theta.size(); ++i) {
        const double c = std::cos(theta.theta[i]);
        const double s = std::sin(theta.theta[i]);
        cos2[i] = c * c;
        sin2[i] = s * s;
        cossin[i] = c * s;
    }
}

ScalarField laplacian(const ScalarField& u) {
    ScalarField out(u.geom);
    const int w = u.geom.width, h = u.geom.height;
    const double ie2 = 1.0 / (u.geom.spacing * u.geom.spacing);
    for (int y = 0; y < h; ++y) {
        const int yu = reflect(y + 1, h), yd = reflect(y - 1, h);
        for (int x = 0; x < w; ++x) {
            const int xr = reflect(x + 1, w), xl = reflect(x - 1, w);
            out.at(x, y) = (u.at(xr, y) + u.at(xl, y) + u.at(x, yu) + u.at(x, yd) -
                            4.0 * u.at(x, y)) * ie2;
        }
    }
    return out;
}

namespace {

void directional_second_kernel(const ScalarField& u, const std::vector<double>& cos2,
                               const std::vector<double>& sin2,
                               const std::vector<double>& cossin, ScalarField& out) {
    const int w = u.geom.width, h = u.geom.height;
    const double ie2 = 1.0 / (u.geom.spacing * u.geom.spacing);
    for (int y = 0; y < h; ++y) {
        const int yu = reflect(y + 1, h), yd = reflect(y - 1, h);
        for (int x = 0; x < w; ++x) {
            const int xr = reflect(x + 1, w), xl = reflect(x - 1, w);
            const size_t i = u.idx(x, y);
            const double c = u.at(x, y);
            const double dxx = u.at(xr, y) - 2.0 * c + u.at(xl, y);
            const double dyy = u.at(x, yu) - 2.0 * c + u.at(x, yd);
            const double dxy = 0.25 * (u.at(xr, yu) + u.at(xl, yd) - u.at(xr, yd) - u.at(xl, yu));
            out.values[i] = (cos2[i] * dxx + sin2[i] * dyy + 2.0 * cossin[i] * dxy) * ie2;
        }
    }
}

}  // namespace

ScalarField directional_second(const ScalarField& u, const OrientationMap& theta) {
    check_same_geometry(u.geom, theta.geom, "directional_second");
    std::vector<double> cos2(theta.theta.size()), sin2(theta.theta.size()),
        cossin(theta.theta.size());
    for (size_t i = 0; i < theta.theta.size(); ++i) {
        const double c = std::cos(theta.theta[i]);
        const double s = std::sin(theta.theta[i]);
        cos2[i] = c * c;
        sin2[i] = s * s;
        cossin[i] = c * s;
    }
    ScalarField out(u.geom);
    directional_second_kernel(u, cos2, sin2, cossin, out);
    return out;
}

ScalarField directional_fourth(const ScalarField& u, const OrientationMap& theta) {
    ScalarField mid = directional_second(u, theta);
    return directional_second(mid, theta);
}

void apply_into(const HeterogeneousOperator& op, const ScalarField& u, ScalarField& out,
                ApplyWorkspace& ws) {
    check_same_geometry(op.geom(), u.geom, "apply");
    if (!(out.geom == u.geom)) out = ScalarField(u.geom);

    const size_t n = u.values.size();
    for (double& v : out.values) v = 0.0;

    if (op.has_a1) {
        if (!(ws.lap.geom == u.geom)) ws.lap = ScalarField(u.geom);
        const int w = u.geom.width, h = u.geom.height;
        const double ie2 = 1.0 / (u.geom.spacing * u.geom.spacing);
        for (int y = 0; y < h; ++y) {
            const int yu = reflect(y + 1, h), yd = reflect(y - 1, h);
            for (int x = 0; x < w; ++x) {
                const int xr = reflect(x + 1, w), xl = reflect(x - 1, w);
                ws.lap.at(x, y) = (u.at(xr, y) + u.at(xl, y) + u.at(x, yu) + u.at(x, yd) -
                                   4.0 * u.at(x, y)) * ie2;
            }
        }
        for (size_t i = 0; i < n; ++i) out.values[i] += op.coeffs.a1.values[i] * ws.lap.values[i];
    }

    const bool need_d2 = op.has_a2 || op.has_a3;
    if (need_d2) {
        if (!(ws.d2.geom == u.geom)) ws.d2 = ScalarField(u.geom);
        directional_second_kernel(u, op.cos2, op.sin2, op.cossin, ws.d2);
    }
    if (op.has_a2)
        for (size_t i = 0; i < n; ++i) out.values[i] += op.coeffs.a2.values[i] * ws.d2.values[i];
    if (op.has_a3) {
        if (op.beta == 1) {
            for (size_t i = 0; i < n; ++i)
                out.values[i] += op.coeffs.a3.values[i] * ws.d2.values[i];
        } else {
            if (!(ws.d4.geom == u.geom)) ws.d4 = ScalarField(u.geom);
            directional_second_kernel(ws.d2, op.cos2, op.sin2, op.cossin, ws.d4);
            for (size_t i = 0; i < n; ++i)
                out.values[i] -= op.coeffs.a3.values[i] * ws.d4.values[i];
        }
    }
}

ScalarField apply(const HeterogeneousOperator& op, const ScalarField& u) {
    ScalarField out;
    ApplyWorkspace ws;
    apply_into(op, u, out, ws);
    return out;
}

ScalarField gaussian_smooth(const ScalarField& u, const GaussianParams& g) {
    if (!(g.sigma > 0.0) || !std::isfinite(g.sigma))
        throw std::invalid_argument("gaussian_smooth: sigma must be positive");
    if (g.truncation_radius < 3.0)
        throw std::invalid_argument("gaussian_smooth: truncation_radius must be >= 3");

    const int radius = static_cast<int>(std::floor(g.truncation_radius * g.sigma));
    if (radius == 0) return u;

    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-0.5 * k * k / (g.sigma * g.sigma));
        sum += taps[k + radius];
    }
    for (double& t : taps) t /= sum;

    const int w = u.geom.width, h = u.geom.height;
    ScalarField mid(u.geom), out(u.geom);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[k + radius] * u.at(reflect(x + k, w), y);
            mid.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[k + radius] * mid.at(x, reflect(y + k, h));
            out.at(x, y) = acc;
        }
    return out;
}

ScalarField forward_output(const HeterogeneousOperator& op, const ScalarField& stimulus,
                           const GaussianParams& g) {
    return apply(op, gaussian_smooth(stimulus, g));
}

double energy(const HeterogeneousOperator& op, const ScalarField& u, const ScalarField& f) {
    check_same_geometry(op.geom(), u.geom, "energy");
    check_same_geometry(u.geom, f.geom, "energy");

    const int w = u.geom.width, h = u.geom.height;
    const double eps = u.geom.spacing;
    const double inv_eps = 1.0 / eps;

    // Fourth-order branch needs the full directional second derivative.
    ScalarField d2;
    const bool need_d2 = op.has_a3 && op.beta == 2;
    if (need_d2) {
        d2 = ScalarField(u.geom);
        directional_second_kernel(u, op.cos2, op.sin2, op.cossin, d2);
    }

    double acc = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = u.idx(x, y);
            const double fx = (x + 1 < w) ? (u.at(x + 1, y) - u.at(x, y)) * inv_eps : 0.0;
            const double fy = (y + 1 < h) ? (u.at(x, y + 1) - u.at(x, y)) * inv_eps : 0.0;
            const double cx = (x + 1 < w && x - 1 >= 0)
                                  ? (u.at(x + 1, y) - u.at(x - 1, y)) * 0.5 * inv_eps
                                  : 0.0;
            const double cy = (y + 1 < h && y - 1 >= 0)
                                  ? (u.at(x, y + 1) - u.at(x, y - 1)) * 0.5 * inv_eps
                                  : 0.0;

            const double a1 = op.coeffs.a1.values[i];
            const double a2 = op.coeffs.a2.values[i];
            const double a3 = op.coeffs.a3.values[i];

            double e = 0.5 * a1 * a1 * (fx * fx + fy * fy);

            double w2 = a2 * a2;
            if (op.beta == 1) w2 += a3 * a3;
            if (w2 != 0.0)
                e += w2 * (0.5 * (op.cos2[i] * fx * fx + op.sin2[i] * fy * fy) +
                           op.cossin[i] * cx * cy);

            if (need_d2) e += 0.5 * a3 * a3 * d2.values[i] * d2.values[i];

            e += f.values[i] * u.values[i];
            acc += e;
        }
    }
    return eps * eps * acc;
}

std::string describe(const HeterogeneousOperator& op) {
    const size_t n = op.geom().nodes();
    auto mass = [n](const ScalarField& a) {
        size_t active = 0;
        for (double v : a.values)
            if (v != 0.0) ++active;
        return static_cast<double>(active) / static_cast<double>(n);
    };
    double tmin = op.theta.theta[0], tmax = op.theta.theta[0];
    for (double t : op.theta.theta) {
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "grid=%dx%d@%g beta=%d active(a1)=%.4f active(a2)=%.4f active(a3)=%.4f "
                  "theta=[%.6f,%.6f]",
                  op.geom().width, op.geom().height, op.geom().spacing, op.beta,
                  mass(op.coeffs.a1), mass(op.coeffs.a2), mass(op.coeffs.a3), tmin, tmax);
    return buf;
}

}
