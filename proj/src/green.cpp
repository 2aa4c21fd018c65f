#include "hetpde/green.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "hetpde/grid_io.hpp"

namespace hetpde {

GreenFunction green(const HeterogeneousOperator& op, int source_x, int source_y,
                    const SolverConfig& config) {
    const GridGeometry& g = op.geom();
    const int margin = (op.has_a3 && op.beta == 2) ? 2 : 1;
    if (source_x < margin || source_x >= g.width - margin || source_y < margin ||
        source_y >= g.height - margin)
        throw std::invalid_argument("green: source must be at least " + std::to_string(margin) +
                                    " cells from the boundary");

    ScalarField rhs(g, 0.0);
    rhs.at(source_x, source_y) = 1.0 / (g.spacing * g.spacing);
    const double mean = field_mean(rhs);
    for (double& v : rhs.values) v -= mean;

    SolverConfig cfg = config;
    cfg.boundary = BoundaryMode::neumann;
    SolveReport report = solve(op, rhs, cfg);

    GreenFunction gf;
    gf.source_x = source_x;
    gf.source_y = source_y;
    gf.iterations = report.iterations;
    gf.converged = report.converged;
    gf.field = std::move(report.solution);
    const double m = field_mean(gf.field);
    for (double& v : gf.field.values) v -= m;
    gf.operator_digest = describe(op);
    return gf;
}

namespace {

// Bilinear sample of a field at physical coordinates; valid for
// p/eps within [0, n-1] on each axis.
bool bilinear(const ScalarField& u, double px, double py, double& out) {
    const double gx = px / u.geom.spacing;
    const double gy = py / u.geom.spacing;
    if (gx < 0.0 || gy < 0.0 || gx > u.geom.width - 1 || gy > u.geom.height - 1) return false;
    int x0 = static_cast<int>(std::floor(gx));
    int y0 = static_cast<int>(std::floor(gy));
    if (x0 >= u.geom.width - 1) x0 = u.geom.width - 2;
    if (y0 >= u.geom.height - 1) y0 = u.geom.height - 2;
    const double tx = gx - x0;
    const double ty = gy - y0;
    out = (1 - tx) * (1 - ty) * u.at(x0, y0) + tx * (1 - ty) * u.at(x0 + 1, y0) +
          (1 - tx) * ty * u.at(x0, y0 + 1) + tx * ty * u.at(x0 + 1, y0 + 1);
    return true;
}

// Distance from the source along one ray until -G drops below the level.
double ray_extent(const ScalarField& neg, double sx, double sy, double dir_x, double dir_y,
                  double level) {
    const double step = neg.geom.spacing / 4.0;
    double t = 0.0;
    double prev;
    if (!bilinear(neg, sx, sy, prev)) return 0.0;
    for (;;) {
        const double tn = t + step;
        double val;
        if (!bilinear(neg, sx + tn * dir_x, sy + tn * dir_y, val)) return t;
        if (val < level) {
            const double d = prev - val;
            return d > 0.0 ? t + step * (prev - level) / d : t;
        }
        t = tn;
        prev = val;
    }
}

}  // namespace

double anisotropy_ratio(const GreenFunction& gf, double level_fraction) {
    if (!(level_fraction > 0.0 && level_fraction < 1.0))
        throw std::invalid_argument("anisotropy_ratio: level_fraction must be in (0, 1)");

    ScalarField neg = gf.field;
    for (double& v : neg.values) v = -v;

    const double lo = field_min(neg);
    const double hi = field_max(neg);
    if (!(hi > lo)) throw std::runtime_error("anisotropy_ratio: constant field");
    const double level = lo + level_fraction * (hi - lo);

    size_t above = 0;
    for (double v : neg.values)
        if (v >= level) ++above;
    if (above <= 1)
        throw std::runtime_error("anisotropy_ratio: degenerate level set (" +
                                 std::to_string(above) + " cells)");

    const double eps = neg.geom.spacing;
    const double sx = gf.source_x * eps;
    const double sy = gf.source_y * eps;
    if (neg.at(gf.source_x, gf.source_y) < level)
        throw std::runtime_error("anisotropy_ratio: source below the level");

    double ext_min = 0.0, ext_max = 0.0;
    for (int k = 0; k < 8; ++k) {
        const double phi = std::numbers::pi * k / 8.0;
        const double cx = std::cos(phi), cy = std::sin(phi);
        const double ext = ray_extent(neg, sx, sy, cx, cy, level) +
                           ray_extent(neg, sx, sy, -cx, -cy, level);
        if (k == 0) {
            ext_min = ext_max = ext;
        } else {
            ext_min = std::min(ext_min, ext);
            ext_max = std::max(ext_max, ext);
        }
    }
    if (!(ext_min > 0.0))
        throw std::runtime_error("anisotropy_ratio: degenerate level set (zero extent)");
    return ext_max / ext_min;
}

ScalarField green_superposition(const std::vector<GreenFunction>& greens, const ScalarField& f) {
    if (greens.empty()) throw std::invalid_argument("green_superposition: no Green functions");
    const GridGeometry& g = greens.front().field.geom;
    if (!(f.geom == g)) throw std::invalid_argument("green_superposition: geometry mismatch");
    const double eps2 = g.spacing * g.spacing;

    ScalarField covered(g, 0.0);
    ScalarField out(g, 0.0);
    for (const GreenFunction& gf : greens) {
        if (!(gf.field.geom == g))
            throw std::invalid_argument("green_superposition: geometry mismatch");
        covered.at(gf.source_x, gf.source_y) = 1.0;
        const double w = eps2 * f.at(gf.source_x, gf.source_y);
        if (w == 0.0) continue;
        for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += w * gf.field.values[i];
    }
    for (size_t i = 0; i < f.values.size(); ++i)
        if (f.values[i] != 0.0 && covered.values[i] == 0.0)
            throw std::invalid_argument(
                "green_superposition: right-hand side supported outside the source set");
    return out;
}

LogFit fit_log_profile(const GreenFunction& gf, double r_min, double r_max) {
    if (!(r_min > 0.0 && r_max > r_min))
        throw std::invalid_argument("fit_log_profile: need 0 < r_min < r_max");
    std::vector<double> xs, ys;
    const ScalarField& f = gf.field;
    for (int y = 0; y < f.geom.height; ++y)
        for (int x = 0; x < f.geom.width; ++x) {
            const double dx = x - gf.source_x;
            const double dy = y - gf.source_y;
            const double r = std::sqrt(dx * dx + dy * dy);
            if (r < r_min || r > r_max) continue;
            xs.push_back(std::log(r));
            ys.push_back(f.at(x, y));
        }
    if (xs.size() < 3) throw std::runtime_error("fit_log_profile: too few samples");

    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::runtime_error("fit_log_profile: degenerate radii");
    LogFit fit;
    fit.alpha = (n * sxy - sx * sy) / denom;
    fit.beta = (sy - fit.alpha * sx) / n;
    double ss_res = 0.0;
    const double mean_y = sy / n;
    double ss_tot = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.alpha * xs[i] + fit.beta;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

namespace {

struct Segment {
    double x0, y0, x1, y1;
};

// Corner layout: v0=(x,y) v1=(x+1,y) v2=(x+1,y+1) v3=(x,y+1);
// edges: 0 bottom, 1 right, 2 top, 3 left.
void cell_segments(const ScalarField& u, int x, int y, double level,
                   std::vector<Segment>& out) {
    const double eps = u.geom.spacing;
    const double v[4] = {u.at(x, y), u.at(x + 1, y), u.at(x + 1, y + 1), u.at(x, y + 1)};
    int mask = 0;
    for (int i = 0; i < 4; ++i)
        if (v[i] >= level) mask |= 1 << i;
    if (mask == 0 || mask == 15) return;

    auto edge_point = [&](int e, double& px, double& py) {
        const int a[4] = {0, 1, 3, 0};
        const int b[4] = {1, 2, 2, 3};
        const double va = v[a[e]], vb = v[b[e]];
        const double t = (level - va) / (vb - va);
        const double ax = (e == 1) ? x + 1 : x;
        const double ay = (e == 2) ? y + 1 : y;
        const double bx = (e == 3) ? x : x + 1;
        const double by = (e == 0) ? y : y + 1;
        px = (ax + t * (bx - ax)) * eps;
        py = (ay + t * (by - ay)) * eps;
    };

    auto emit = [&](int e1, int e2) {
        Segment s;
        edge_point(e1, s.x0, s.y0);
        edge_point(e2, s.x1, s.y1);
        out.push_back(s);
    };

    switch (mask) {
        case 1:  emit(3, 0); break;
        case 2:  emit(0, 1); break;
        case 3:  emit(3, 1); break;
        case 4:  emit(1, 2); break;
        case 6:  emit(0, 2); break;
        case 7:  emit(3, 2); break;
        case 8:  emit(2, 3); break;
        case 9:  emit(0, 2); break;
        case 11: emit(1, 2); break;
        case 12: emit(3, 1); break;
        case 13: emit(0, 1); break;
        case 14: emit(3, 0); break;
        case 5:
        case 10: {
            const double center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            const bool center_in = center >= level;
            if ((mask == 5) == center_in) {
                emit(3, 2);
                emit(0, 1);
            } else {
                emit(3, 0);
                emit(1, 2);
            }
            break;
        }
        default: break;
    }
}

long long quantize(double v, double eps) { return std::llround(v / eps * 4096.0); }

}  // namespace

std::vector<Polyline> level_lines(const ScalarField& u, int n_levels) {
    if (n_levels < 1) throw std::invalid_argument("level_lines: n_levels must be >= 1");
    const double lo = field_min(u);
    const double hi = field_max(u);
    std::vector<Polyline> result;
    if (!(hi > lo)) return result;

    const double eps = u.geom.spacing;
    for (int li = 0; li < n_levels; ++li) {
        const double level = lo + (hi - lo) * (li + 1) / (n_levels + 1);
        std::vector<Segment> segs;
        for (int y = 0; y + 1 < u.geom.height; ++y)
            for (int x = 0; x + 1 < u.geom.width; ++x) cell_segments(u, x, y, level, segs);

        // Chain segments into polylines by matching endpoints.
        std::multimap<std::pair<long long, long long>, size_t> ends;
        for (size_t i = 0; i < segs.size(); ++i) {
            ends.emplace(std::make_pair(quantize(segs[i].x0, eps), quantize(segs[i].y0, eps)), i);
            ends.emplace(std::make_pair(quantize(segs[i].x1, eps), quantize(segs[i].y1, eps)), i);
        }
        std::vector<bool> used(segs.size(), false);
        for (size_t i = 0; i < segs.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            std::vector<std::pair<double, double>> pts = {{segs[i].x0, segs[i].y0},
                                                          {segs[i].x1, segs[i].y1}};
            // Extend forward from the tail, then backward from the head.
            for (int dirpass = 0; dirpass < 2; ++dirpass) {
                for (;;) {
                    const auto& tip = dirpass == 0 ? pts.back() : pts.front();
                    const auto key = std::make_pair(quantize(tip.first, eps),
                                                    quantize(tip.second, eps));
                    auto range = ends.equal_range(key);
                    size_t next = segs.size();
                    for (auto it = range.first; it != range.second; ++it)
                        if (!used[it->second]) {
                            next = it->second;
                            break;
                        }
                    if (next == segs.size()) break;
                    used[next] = true;
                    const Segment& s = segs[next];
                    const bool from_start = quantize(s.x0, eps) == key.first &&
                                            quantize(s.y0, eps) == key.second;
                    const std::pair<double, double> p =
                        from_start ? std::make_pair(s.x1, s.y1) : std::make_pair(s.x0, s.y0);
                    if (dirpass == 0)
                        pts.push_back(p);
                    else
                        pts.insert(pts.begin(), p);
                }
            }
            Polyline pl;
            pl.level = level;
            pl.points = std::move(pts);
            result.push_back(std::move(pl));
        }
    }
    return result;
}

void write_polylines_csv(const std::string& path, const std::vector<Polyline>& lines) {
    std::string out = "level,polyline,x,y\n";
    char buf[128];
    for (size_t i = 0; i < lines.size(); ++i)
        for (const auto& p : lines[i].points) {
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", lines[i].level, i, p.first,
                          p.second);
            out += buf;
        }
    write_text_atomic(path, out);
}

}
