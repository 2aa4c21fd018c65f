// Command line front end. Each subcommand assembles an experiment from a
// key=value config file plus flag overrides, runs it, and drops every
// artifact together with a re-runnable manifest into the output directory.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetpde/errors.hpp"
#include "hetpde/green.hpp"
#include "hetpde/grid_io.hpp"
#include "hetpde/homogenization.hpp"
#include "hetpde/image.hpp"
#include "hetpde/operators.hpp"
#include "hetpde/orientation.hpp"
#include "hetpde/solver.hpp"
#include "hetpde/version.hpp"

namespace {

using namespace hetpde;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (!out.emplace(full, value).second) throw ConfigError(where + ": duplicate key " + full);
    }
    return out;
}

class Settings {
public:
    explicit Settings(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& def) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? def : it->second;
    }

    double num(const std::string& key, double def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        return parse_num(key, it->second);
    }

    long long integer(const std::string& key, long long def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        return parse_int(key, it->second);
    }

    std::uint64_t seed(const std::string& key, std::uint64_t def) const {
        long long v = integer(key, static_cast<long long>(def));
        if (v < 0) throw ConfigError(key + ": seed must be nonnegative");
        return static_cast<std::uint64_t>(v);
    }

    bool flag(const std::string& key, bool def) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        const std::string& v = it->second;
        if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
        if (v == "off" || v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(key + ": expected on/off, got '" + v + "'");
    }

    std::vector<double> num_list(const std::string& key) const {
        std::vector<double> out;
        auto it = kv_.find(key);
        if (it == kv_.end()) return out;
        for (const std::string& item : split_list(key, it->second))
            out.push_back(parse_num(key, item));
        return out;
    }

    std::vector<std::uint64_t> seed_list(const std::string& key) const {
        std::vector<std::uint64_t> out;
        auto it = kv_.find(key);
        if (it == kv_.end()) return out;
        for (const std::string& item : split_list(key, it->second)) {
            long long v = parse_int(key, item);
            if (v < 0) throw ConfigError(key + ": seed must be nonnegative");
            out.push_back(static_cast<std::uint64_t>(v));
        }
        return out;
    }

    // Typo guard: every key present in the file must belong to the command.
    void restrict_to(const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : kv_) {
            (void)value;
            if (!allowed.count(key)) throw ConfigError("unrecognized key: " + key);
        }
    }

private:
    static std::vector<std::string> split_list(const std::string& key, const std::string& v) {
        std::vector<std::string> items;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) throw ConfigError(key + ": empty list element");
            items.push_back(item);
        }
        if (items.empty()) throw ConfigError(key + ": empty list");
        return items;
    }

    static double parse_num(const std::string& key, const std::string& v) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw ConfigError(key + ": expected a number, got '" + v + "'");
        return x;
    }

    static long long parse_int(const std::string& key, const std::string& v) {
        char* end = nullptr;
        const long long x = std::strtoll(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw ConfigError(key + ": expected an integer, got '" + v + "'");
        return x;
    }

    std::map<std::string, std::string> kv_;
};

class Manifest {
public:
    void comment(const std::string& text) { lines_.push_back("# " + text); }
    void section(const std::string& name) {
        lines_.push_back("");
        lines_.push_back("[" + name + "]");
    }
    void put(const std::string& key, const std::string& v) { lines_.push_back(key + " = " + v); }
    void put_num(const std::string& key, double v) { put(key, fmt_num(v)); }
    void put_int(const std::string& key, long long v) { put(key, std::to_string(v)); }
    void put_flag(const std::string& key, bool v) { put(key, v ? "on" : "off"); }

    std::string text() const {
        std::string out;
        for (const std::string& l : lines_) {
            out += l;
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> lines_;
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// operator assembly

struct OperatorSpecs {
    int beta = 2;
    double p1 = 1.0, p2 = 0.0, p3 = 0.0;
    std::uint64_t partition_seed = 1;
    std::string theta_kind = "constant";
    double theta_constant = 0.0;
    std::uint64_t theta_seed = 2;
    int pinwheel_samples = 30;
    double pinwheel_frequency_scale = 0.0;
    double binary_prob_horizontal = 0.5;
};

OperatorSpecs read_operator(const Settings& s) {
    OperatorSpecs o;
    o.beta = static_cast<int>(s.integer("operator.beta", 2));
    o.p1 = s.num("operator.p1", 1.0);
    o.p2 = s.num("operator.p2", 0.0);
    o.p3 = s.num("operator.p3", 0.0);
    o.partition_seed = s.seed("operator.partition_seed", 1);
    o.theta_kind = s.str("operator.theta", "constant");
    o.theta_constant = s.num("operator.theta_constant", 0.0);
    o.theta_seed = s.seed("operator.theta_seed", 2);
    o.pinwheel_samples = static_cast<int>(s.integer("operator.pinwheel_samples", 30));
    o.pinwheel_frequency_scale = s.num("operator.pinwheel_frequency_scale", 0.0);
    o.binary_prob_horizontal = s.num("operator.binary_prob_horizontal", 0.5);
    if (s.has("seed")) {
        const std::uint64_t base = s.seed("seed", 0);
        o.partition_seed = base;
        o.theta_seed = base + 1;
    }
    static const std::set<std::string> kinds{"constant", "pinwheel", "saltpepper", "binary_hv"};
    if (!kinds.count(o.theta_kind))
        throw ConfigError("operator.theta: expected constant, pinwheel, saltpepper or binary_hv");
    return o;
}

OrientationMap build_theta(const GridGeometry& g, const OperatorSpecs& o) {
    if (o.theta_kind == "pinwheel") {
        PinwheelParams p;
        p.n_samples = o.pinwheel_samples;
        p.seed = o.theta_seed;
        p.frequency_scale = o.pinwheel_frequency_scale;
        return pinwheel_map(g, p);
    }
    if (o.theta_kind == "saltpepper") return salt_pepper_map(g, o.theta_seed);
    if (o.theta_kind == "binary_hv") return binary_hv_map(g, o.binary_prob_horizontal, o.theta_seed);
    return constant_map(g, o.theta_constant);
}

HeterogeneousOperator build_operator(const GridGeometry& g, const OperatorSpecs& o) {
    return HeterogeneousOperator(build_theta(g, o),
                                 sample_partition(g, o.p1, o.p2, o.p3, o.partition_seed), o.beta);
}

void echo_operator(Manifest& m, const OperatorSpecs& o) {
    m.section("operator");
    m.put_int("beta", o.beta);
    m.put_num("p1", o.p1);
    m.put_num("p2", o.p2);
    m.put_num("p3", o.p3);
    m.put_int("partition_seed", static_cast<long long>(o.partition_seed));
    m.put("theta", o.theta_kind);
    m.put_num("theta_constant", o.theta_constant);
    m.put_int("theta_seed", static_cast<long long>(o.theta_seed));
    m.put_int("pinwheel_samples", o.pinwheel_samples);
    m.put_num("pinwheel_frequency_scale", o.pinwheel_frequency_scale);
    m.put_num("binary_prob_horizontal", o.binary_prob_horizontal);
}

void echo_theta_only(Manifest& m, const OperatorSpecs& o) {
    m.section("operator");
    m.put("theta", o.theta_kind);
    m.put_num("theta_constant", o.theta_constant);
    m.put_int("theta_seed", static_cast<long long>(o.theta_seed));
    m.put_int("pinwheel_samples", o.pinwheel_samples);
    m.put_num("pinwheel_frequency_scale", o.pinwheel_frequency_scale);
    m.put_num("binary_prob_horizontal", o.binary_prob_horizontal);
}

// ---------------------------------------------------------------------------
// solver settings

struct SolverSpecs {
    SolverConfig config;
    double base_tolerance = 1e-4;
    bool scale_tolerance = true;
    std::string boundary = "neumann";
};

SolverSpecs read_solver(const Settings& s) {
    SolverSpecs sp;
    sp.config.dt = s.num("solver.dt", 0.0);
    sp.base_tolerance = s.num("solver.tolerance", 1e-4);
    sp.scale_tolerance = s.flag("solver.tolerance_scaling", true);
    sp.config.max_iterations = s.integer("solver.max_iterations", 2000000);
    sp.boundary = s.str("solver.boundary", "neumann");
    sp.config.record_energy = s.flag("solver.record_energy", false);
    if (sp.boundary == "neumann")
        sp.config.boundary = BoundaryMode::neumann;
    else if (sp.boundary == "dirichlet")
        sp.config.boundary = BoundaryMode::dirichlet_zero;
    else
        throw ConfigError("solver.boundary: expected neumann or dirichlet");
    return sp;
}

// The library stopping sum is unweighted, so the threshold that gives a fixed
// per-node accuracy grows with the node count; reference size is 256 x 256.
SolverConfig effective_solver(const SolverSpecs& sp, std::size_t nodes) {
    SolverConfig cfg = sp.config;
    cfg.tolerance = sp.scale_tolerance
                        ? sp.base_tolerance * (static_cast<double>(nodes) / (256.0 * 256.0))
                        : sp.base_tolerance;
    return cfg;
}

void echo_solver(Manifest& m, const SolverSpecs& sp) {
    m.section("solver");
    m.put_num("dt", sp.config.dt);
    m.put_num("tolerance", sp.base_tolerance);
    m.put_flag("tolerance_scaling", sp.scale_tolerance);
    m.put_int("max_iterations", sp.config.max_iterations);
    m.put("boundary", sp.boundary);
    m.put_flag("record_energy", sp.config.record_energy);
}

// ---------------------------------------------------------------------------
// stimulus resolution

struct StimulusInfo {
    RgbImage img;
    bool from_file = false;
    std::string input;
    std::string kind = "smooth";
    double strip_gray = 0.5;
    double strip_fraction = 1.0 / 3.0;
};

StimulusInfo resolve_stimulus(const Settings& s) {
    StimulusInfo st;
    st.input = s.str("io.input", "");
    st.kind = s.str("stimulus.kind", "smooth");
    st.strip_gray = s.num("stimulus.strip_gray", 0.5);
    st.strip_fraction = s.num("stimulus.strip_fraction", 1.0 / 3.0);
    if (!st.input.empty()) {
        st.img = load_image(st.input);
        st.from_file = true;
        return st;
    }
    const int w = static_cast<int>(s.integer("grid.width", 64));
    const int h = static_cast<int>(s.integer("grid.height", 64));
    const double eps = s.num("grid.spacing", 1.0);
    if (st.kind == "contrast") {
        st.img = make_simultaneous_contrast(w, h, st.strip_gray, st.strip_fraction);
        if (eps != 1.0) {
            st.img.geom.spacing = eps;
            for (ScalarField& b : st.img.bands) b.geom.spacing = eps;
        }
    } else if (st.kind == "smooth") {
        const GridGeometry g(w, h, eps);
        st.img = RgbImage(g);
        const ScalarField u = make_smooth_stimulus(g);
        for (ScalarField& b : st.img.bands) b = u;
    } else {
        throw ConfigError("stimulus.kind: expected contrast or smooth");
    }
    return st;
}

void echo_grid(Manifest& m, const GridGeometry& g) {
    m.section("grid");
    m.put_int("width", g.width);
    m.put_int("height", g.height);
    m.put_num("spacing", g.spacing);
}

void echo_stimulus(Manifest& m, const StimulusInfo& st, const std::string& save_mode,
                   int bit_depth) {
    m.section("io");
    m.put("input", st.input);
    m.put("save_mode", save_mode);
    m.put_int("bit_depth", bit_depth);
    if (!st.from_file) {
        m.section("stimulus");
        m.put("kind", st.kind);
        m.put_num("strip_gray", st.strip_gray);
        m.put_num("strip_fraction", st.strip_fraction);
    }
}

bool bands_identical(const RgbImage& img) {
    return img.bands[0].values == img.bands[1].values &&
           img.bands[0].values == img.bands[2].values;
}

// One CSV for grayscale content, three band CSVs otherwise.
std::vector<std::string> write_band_csvs(const std::string& dir, const std::string& stem,
                                         const RgbImage& img) {
    std::vector<std::string> written;
    if (bands_identical(img)) {
        const std::string path = join_path(dir, stem + ".csv");
        write_field_csv(path, img.bands[0]);
        written.push_back(path);
        return written;
    }
    static const char* suffix[3] = {"_r", "_g", "_b"};
    for (int b = 0; b < 3; ++b) {
        const std::string path = join_path(dir, stem + suffix[b] + ".csv");
        write_field_csv(path, img.bands[b]);
        written.push_back(path);
    }
    return written;
}

SaveMode parse_save_mode(const std::string& v) {
    if (v == "clip") return SaveMode::clip;
    if (v == "rescale") return SaveMode::rescale;
    throw ConfigError("io.save_mode: expected clip or rescale");
}

int parse_bit_depth(const Settings& s) {
    const long long depth = s.integer("io.bit_depth", 8);
    if (depth != 8 && depth != 16) throw ConfigError("io.bit_depth: expected 8 or 16");
    return static_cast<int>(depth);
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void finish_manifest(Manifest& m, const std::string& dir, const Stopwatch& watch) {
    m.comment("wall_clock_seconds = " + fmt_num(watch.seconds()));
    write_text_atomic(join_path(dir, "manifest.txt"), m.text());
    std::cout << "wrote " << join_path(dir, "manifest.txt") << "\n";
}

Manifest start_manifest(const std::string& command, const std::string& dir) {
    Manifest m;
    m.comment("hetpde " + std::string(library_version));
    m.comment("re-run: hetpde " + command + " --config manifest.txt");
    m.put("command", command);
    m.put("out_dir", dir);
    return m;
}

// ---------------------------------------------------------------------------
// allowlists

const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{"command", "out_dir", "seed"};
    return keys;
}

std::set<std::string> with(std::set<std::string> base, std::initializer_list<const char*> more) {
    for (const char* k : more) base.insert(k);
    return base;
}

std::set<std::string> grid_keys(std::set<std::string> base) {
    return with(std::move(base), {"grid.width", "grid.height", "grid.spacing"});
}

std::set<std::string> operator_keys(std::set<std::string> base) {
    return with(std::move(base),
                {"operator.beta", "operator.p1", "operator.p2", "operator.p3",
                 "operator.partition_seed", "operator.theta", "operator.theta_constant",
                 "operator.theta_seed", "operator.pinwheel_samples",
                 "operator.pinwheel_frequency_scale", "operator.binary_prob_horizontal"});
}

std::set<std::string> solver_keys(std::set<std::string> base) {
    return with(std::move(base),
                {"solver.dt", "solver.tolerance", "solver.tolerance_scaling",
                 "solver.max_iterations", "solver.boundary", "solver.record_energy"});
}

std::set<std::string> stimulus_keys(std::set<std::string> base) {
    return with(std::move(base), {"io.input", "io.save_mode", "io.bit_depth", "stimulus.kind",
                                  "stimulus.strip_gray", "stimulus.strip_fraction",
                                  "gaussian.sigma", "gaussian.truncation"});
}

// ---------------------------------------------------------------------------
// commands

int cmd_differentiate(const Settings& s, const std::string& dir) {
    s.restrict_to(stimulus_keys(operator_keys(grid_keys(common_keys()))));
    const Stopwatch watch;
    const StimulusInfo st = resolve_stimulus(s);
    const OperatorSpecs os = read_operator(s);
    const GaussianParams gp{s.num("gaussian.sigma", 1.0), s.num("gaussian.truncation", 3.0)};
    const int bit_depth = parse_bit_depth(s);
    const std::string save_mode = s.str("io.save_mode", "rescale");

    const HeterogeneousOperator op = build_operator(st.img.geom, os);
    RgbImage out(st.img.geom);
    for (int b = 0; b < 3; ++b) out.bands[b] = forward_output(op, st.img.bands[b], gp);

    ensure_out_dir(dir);
    const std::string png = join_path(dir, "forward.png");
    save_image(png, out, parse_save_mode(save_mode), bit_depth);
    std::cout << "wrote " << png << "\n";
    for (const std::string& p : write_band_csvs(dir, "forward", out))
        std::cout << "wrote " << p << "\n";

    Manifest m = start_manifest("differentiate", dir);
    m.comment("operator: " + describe(op));
    echo_grid(m, st.img.geom);
    echo_operator(m, os);
    m.section("gaussian");
    m.put_num("sigma", gp.sigma);
    m.put_num("truncation", gp.truncation_radius);
    echo_stimulus(m, st, save_mode, bit_depth);
    finish_manifest(m, dir, watch);
    return 0;
}

int cmd_reconstruct(const Settings& s, const std::string& dir) {
    s.restrict_to(solver_keys(stimulus_keys(operator_keys(grid_keys(common_keys())))));
    const Stopwatch watch;
    const StimulusInfo st = resolve_stimulus(s);
    const OperatorSpecs os = read_operator(s);
    const SolverSpecs sp = read_solver(s);
    const GaussianParams gp{s.num("gaussian.sigma", 1.0), s.num("gaussian.truncation", 3.0)};
    const int bit_depth = parse_bit_depth(s);
    const std::string save_mode = s.str("io.save_mode", "clip");

    const HeterogeneousOperator op = build_operator(st.img.geom, os);
    const SolverConfig cfg = effective_solver(sp, st.img.geom.nodes());
    const RgbReconstructReport report = reconstruct_rgb(op, st.img, gp, cfg);
    const RgbImage out = to_image(report);

    ensure_out_dir(dir);
    const std::string png = join_path(dir, "reconstruction.png");
    save_image(png, out, parse_save_mode(save_mode), bit_depth);
    std::cout << "wrote " << png << "\n";
    for (const std::string& p : write_band_csvs(dir, "reconstruction", out))
        std::cout << "wrote " << p << "\n";
    const std::string stim_png = join_path(dir, "stimulus.png");
    save_image(stim_png, st.img, SaveMode::clip, bit_depth);
    std::cout << "wrote " << stim_png << "\n";

    const bool gray = bands_identical(st.img);
    if (cfg.record_energy) {
        static const char* suffix[3] = {"_r", "_g", "_b"};
        for (int b = 0; b < (gray ? 1 : 3); ++b) {
            const std::string name = gray ? "energy.csv" : ("energy" + std::string(suffix[b]) + ".csv");
            const std::string path = join_path(dir, name);
            write_trace_csv(path, report.bands[b].energy_trace);
            std::cout << "wrote " << path << "\n";
        }
    }

    Manifest m = start_manifest("reconstruct", dir);
    m.comment("operator: " + describe(op));
    m.comment("dt_used = " + fmt_num(cfg.dt > 0.0 ? cfg.dt : default_dt(op)));
    m.comment("effective_tolerance = " + fmt_num(cfg.tolerance));
    for (int b = 0; b < 3; ++b) {
        const SolveReport& r = report.bands[b];
        m.comment("band" + std::to_string(b) + ": iterations = " + std::to_string(r.iterations) +
                  ", final_update_sum = " + fmt_num(r.final_update_sum) +
                  (r.converged ? "" : ", NOT CONVERGED (max_iterations reached)"));
        if (!r.converged)
            std::cerr << "warning: band " << b << " hit max_iterations before the stopping sum\n";
    }
    echo_grid(m, st.img.geom);
    echo_operator(m, os);
    m.section("gaussian");
    m.put_num("sigma", gp.sigma);
    m.put_num("truncation", gp.truncation_radius);
    echo_solver(m, sp);
    echo_stimulus(m, st, save_mode, bit_depth);
    finish_manifest(m, dir, watch);
    std::cout << "iterations: " << report.bands[0].iterations << ", "
              << report.bands[1].iterations << ", " << report.bands[2].iterations << "\n";
    return 0;
}

int cmd_green(const Settings& s, const std::string& dir) {
    s.restrict_to(with(solver_keys(operator_keys(grid_keys(common_keys()))),
                       {"green.source_x", "green.source_y", "green.level_fraction",
                        "green.fit_rmin", "green.fit_rmax", "green.n_levels"}));
    const Stopwatch watch;
    const GridGeometry g(static_cast<int>(s.integer("grid.width", 65)),
                         static_cast<int>(s.integer("grid.height", 65)),
                         s.num("grid.spacing", 1.0));
    const OperatorSpecs os = read_operator(s);
    const SolverSpecs sp = read_solver(s);
    int sx = static_cast<int>(s.integer("green.source_x", -1));
    int sy = static_cast<int>(s.integer("green.source_y", -1));
    if (sx < 0) sx = g.width / 2;
    if (sy < 0) sy = g.height / 2;
    const double level_fraction = s.num("green.level_fraction", 0.5);
    const double fit_rmin = s.num("green.fit_rmin", 3.0);
    const double fit_rmax = s.num("green.fit_rmax", 12.0);
    const int n_levels = static_cast<int>(s.integer("green.n_levels", 8));

    const HeterogeneousOperator op = build_operator(g, os);
    const GreenFunction gf = green(op, sx, sy, effective_solver(sp, g.nodes()));

    ensure_out_dir(dir);
    write_field_csv(join_path(dir, "green.csv"), gf.field);
    std::cout << "wrote " << join_path(dir, "green.csv") << "\n";
    write_field_png16(join_path(dir, "green.png"), gf.field);
    std::cout << "wrote " << join_path(dir, "green.png") << "\n";
    write_polylines_csv(join_path(dir, "green_contours.csv"), level_lines(gf.field, n_levels));
    std::cout << "wrote " << join_path(dir, "green_contours.csv") << "\n";

    const LogFit fit = fit_log_profile(gf, fit_rmin, fit_rmax);
    std::string aniso_line;
    try {
        aniso_line = fmt_num(anisotropy_ratio(gf, level_fraction));
    } catch (const std::runtime_error& e) {
        aniso_line = std::string("unavailable (") + e.what() + ")";
    }
    std::string summary;
    summary += "operator: " + gf.operator_digest + "\n";
    summary += "source: " + std::to_string(gf.source_x) + "," + std::to_string(gf.source_y) + "\n";
    summary += "iterations: " + std::to_string(gf.iterations) +
               (gf.converged ? "" : " (max_iterations reached)") + "\n";
    summary += "field_min: " + fmt_num(field_min(gf.field)) + "\n";
    summary += "field_max: " + fmt_num(field_max(gf.field)) + "\n";
    summary += "log_fit_alpha: " + fmt_num(fit.alpha) + "\n";
    summary += "log_fit_beta: " + fmt_num(fit.beta) + "\n";
    summary += "log_fit_r_squared: " + fmt_num(fit.r_squared) + "\n";
    summary += "anisotropy_ratio: " + aniso_line + "\n";
    write_text_atomic(join_path(dir, "green_summary.txt"), summary);
    std::cout << "wrote " << join_path(dir, "green_summary.txt") << "\n" << summary;

    Manifest m = start_manifest("green", dir);
    m.comment("operator: " + describe(op));
    m.comment("iterations = " + std::to_string(gf.iterations));
    echo_grid(m, g);
    echo_operator(m, os);
    echo_solver(m, sp);
    m.section("green");
    m.put_int("source_x", sx);
    m.put_int("source_y", sy);
    m.put_num("level_fraction", level_fraction);
    m.put_num("fit_rmin", fit_rmin);
    m.put_num("fit_rmax", fit_rmax);
    m.put_int("n_levels", n_levels);
    finish_manifest(m, dir, watch);
    return 0;
}

int cmd_homogenize(const Settings& s, const std::string& dir) {
    s.restrict_to(with(common_keys(),
                       {"homogenize.epsilons", "homogenize.r", "homogenize.delta",
                        "homogenize.seeds", "homogenize.reference_cells",
                        "homogenize.check_monotone_slack", "homogenize.check_anisotropy_band",
                        "homogenize.check_a0_target", "homogenize.check_a0_band"}));
    const Stopwatch watch;
    HomogenizationParams params;
    params.epsilons = s.num_list("homogenize.epsilons");
    if (params.epsilons.empty()) params.epsilons = {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
    params.r = s.num("homogenize.r", 0.5);
    params.delta = s.num("homogenize.delta", 0.1);
    params.reference_cells = static_cast<int>(s.integer("homogenize.reference_cells", 256));
    params.seeds = s.seed_list("homogenize.seeds");
    if (params.seeds.empty()) {
        const std::uint64_t base = s.has("seed") ? s.seed("seed", 0) : 101;
        for (std::size_t i = 0; i < params.epsilons.size(); ++i) params.seeds.push_back(base + i);
    }
    if (params.seeds.size() != params.epsilons.size())
        throw ConfigError("homogenize.seeds: need one seed per epsilon");
    const double monotone_slack = s.num("homogenize.check_monotone_slack", 1.10);
    const double anisotropy_band = s.num("homogenize.check_anisotropy_band", 0.10);
    const double a0_target = s.num("homogenize.check_a0_target", 0.0);
    const double a0_band = s.num("homogenize.check_a0_band", 0.02);

    const HomogenizationReport report = h_convergence_experiment(params);

    ensure_out_dir(dir);
    write_homogenization_csv(join_path(dir, "homogenization.csv"), report);
    std::cout << "wrote " << join_path(dir, "homogenization.csv") << "\n";

    bool ok = true;
    std::string summary;
    for (std::size_t i = 0; i < report.epsilon_sequence.size(); ++i)
        summary += "epsilon " + fmt_num(report.epsilon_sequence[i]) + ": l2_error " +
                   fmt_num(report.l2_errors[i]) + ", fitted_a0 " +
                   fmt_num(report.fitted_per_epsilon[i]) + ", anisotropy " +
                   fmt_num(report.anisotropy_per_epsilon[i]) + "\n";
    summary += "fitted_coefficient: " + fmt_num(report.fitted_coefficient) + "\n";
    summary += "anisotropy_estimate: " + fmt_num(report.anisotropy_estimate) + "\n";

    if (monotone_slack > 0.0) {
        bool monotone = true;
        for (std::size_t i = 0; i + 1 < report.l2_errors.size(); ++i)
            if (report.l2_errors[i + 1] > monotone_slack * report.l2_errors[i]) monotone = false;
        summary += std::string("check l2_error_monotone: ") + (monotone ? "PASS" : "FAIL") + "\n";
        ok = ok && monotone;
    }
    if (anisotropy_band > 0.0) {
        const bool isotropic = std::abs(report.anisotropy_estimate - 1.0) <= anisotropy_band;
        summary += std::string("check anisotropy_near_one: ") + (isotropic ? "PASS" : "FAIL") + "\n";
        ok = ok && isotropic;
    }
    if (a0_target > 0.0) {
        const bool hit = std::abs(report.fitted_coefficient - a0_target) <= a0_band * a0_target;
        summary += std::string("check fitted_a0_target: ") + (hit ? "PASS" : "FAIL") + "\n";
        ok = ok && hit;
    }
    summary += std::string("verdict: ") + (ok ? "PASS" : "FAIL") + "\n";
    write_text_atomic(join_path(dir, "homogenize_summary.txt"), summary);
    std::cout << "wrote " << join_path(dir, "homogenize_summary.txt") << "\n" << summary;

    Manifest m = start_manifest("homogenize", dir);
    m.section("homogenize");
    std::string eps_list, seed_list;
    for (std::size_t i = 0; i < params.epsilons.size(); ++i) {
        if (i) {
            eps_list += ",";
            seed_list += ",";
        }
        eps_list += fmt_num(params.epsilons[i]);
        seed_list += std::to_string(params.seeds[i]);
    }
    m.put("epsilons", eps_list);
    m.put_num("r", params.r);
    m.put_num("delta", params.delta);
    m.put("seeds", seed_list);
    m.put_int("reference_cells", params.reference_cells);
    m.put_num("check_monotone_slack", monotone_slack);
    m.put_num("check_anisotropy_band", anisotropy_band);
    m.put_num("check_a0_target", a0_target);
    m.put_num("check_a0_band", a0_band);
    finish_manifest(m, dir, watch);
    return ok ? 0 : 5;
}

int cmd_make_map(const Settings& s, const std::string& dir) {
    std::set<std::string> allowed = grid_keys(common_keys());
    allowed = with(std::move(allowed),
                   {"operator.theta", "operator.theta_constant", "operator.theta_seed",
                    "operator.pinwheel_samples", "operator.pinwheel_frequency_scale",
                    "operator.binary_prob_horizontal"});
    s.restrict_to(allowed);
    const Stopwatch watch;
    const GridGeometry g(static_cast<int>(s.integer("grid.width", 64)),
                         static_cast<int>(s.integer("grid.height", 64)),
                         s.num("grid.spacing", 1.0));
    const OperatorSpecs os = read_operator(s);
    const OrientationMap map = build_theta(g, os);

    ensure_out_dir(dir);
    write_orientation_csv(join_path(dir, "map.csv"), map);
    std::cout << "wrote " << join_path(dir, "map.csv") << "\n";
    write_orientation_png(join_path(dir, "map.png"), map);
    std::cout << "wrote " << join_path(dir, "map.png") << "\n";

    long singular = 0;
    for (int y = 0; y + 1 < g.height; ++y)
        for (int x = 0; x + 1 < g.width; ++x)
            if (plaquette_singular(map, x, y)) ++singular;
    std::cout << "singular plaquettes: " << singular << "\n";

    Manifest m = start_manifest("make-map", dir);
    m.comment("singular_plaquettes = " + std::to_string(singular));
    echo_grid(m, g);
    echo_theta_only(m, os);
    finish_manifest(m, dir, watch);
    return 0;
}

int cmd_make_test_image(const Settings& s, const std::string& dir) {
    s.restrict_to(with(grid_keys(common_keys()),
                       {"stimulus.kind", "stimulus.strip_gray", "stimulus.strip_fraction",
                        "io.bit_depth"}));
    const Stopwatch watch;
    const int w = static_cast<int>(s.integer("grid.width", 64));
    const int h = static_cast<int>(s.integer("grid.height", 64));
    const double eps = s.num("grid.spacing", 1.0);
    const std::string kind = s.str("stimulus.kind", "contrast");
    const double strip_gray = s.num("stimulus.strip_gray", 0.5);
    const double strip_fraction = s.num("stimulus.strip_fraction", 1.0 / 3.0);
    const int bit_depth = parse_bit_depth(s);

    RgbImage img;
    if (kind == "contrast") {
        img = make_simultaneous_contrast(w, h, strip_gray, strip_fraction);
    } else if (kind == "smooth") {
        const GridGeometry g(w, h, eps);
        img = RgbImage(g);
        const ScalarField u = make_smooth_stimulus(g);
        for (ScalarField& b : img.bands) b = u;
    } else {
        throw ConfigError("stimulus.kind: expected contrast or smooth");
    }

    ensure_out_dir(dir);
    const std::string png = join_path(dir, "stimulus.png");
    save_image(png, img, SaveMode::clip, bit_depth);
    std::cout << "wrote " << png << "\n";
    for (const std::string& p : write_band_csvs(dir, "stimulus", img))
        std::cout << "wrote " << p << "\n";

    Manifest m = start_manifest("make-test-image", dir);
    echo_grid(m, img.geom);
    m.section("io");
    m.put_int("bit_depth", bit_depth);
    m.section("stimulus");
    m.put("kind", kind);
    m.put_num("strip_gray", strip_gray);
    m.put_num("strip_fraction", strip_fraction);
    finish_manifest(m, dir, watch);
    return 0;
}

int dispatch(const std::string& command, const Settings& s) {
    const std::string declared = s.str("command", command);
    if (declared != command)
        throw ConfigError("config declares command = " + declared + ", but '" + command +
                          "' was invoked");
    const std::string dir = s.str("out_dir", "out");
    if (command == "differentiate") return cmd_differentiate(s, dir);
    if (command == "reconstruct") return cmd_reconstruct(s, dir);
    if (command == "green") return cmd_green(s, dir);
    if (command == "homogenize") return cmd_homogenize(s, dir);
    if (command == "make-map") return cmd_make_map(s, dir);
    return cmd_make_test_image(s, dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heterogeneous-operator lightness laboratory"};
    app.set_version_flag("--version", std::string(hetpde::library_version));
    app.require_subcommand(1);

    static const char* names[] = {"differentiate", "reconstruct",    "green",
                                  "homogenize",    "make-test-image", "make-map"};
    static const char* blurbs[] = {
        "apply the operator to a smoothed stimulus and export the result",
        "solve the lightness reconstruction and export images and traces",
        "estimate an impulse response, its level lines, profile fit and anisotropy",
        "run the coefficient-convergence experiment and check its verdict",
        "generate a synthetic test chart",
        "generate an orientation map"};
    std::string config_path, out_dir;
    long long seed_value = 0;
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--out-dir", out_dir, "output directory (default: out)");
        sub->add_option("--seed", seed_value, "override every seed in the config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = parse_config_file(config_path);
        if (sub->count("--out-dir")) kv["out_dir"] = out_dir;
        if (sub->count("--seed")) {
            if (seed_value < 0) throw ConfigError("--seed must be nonnegative");
            kv["seed"] = std::to_string(seed_value);
        }
        return dispatch(sub->get_name(), Settings(std::move(kv)));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hetpde::InstabilityError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 4;
    } catch (const hetpde::ValidationError& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 5;
    } catch (const hetpde::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
