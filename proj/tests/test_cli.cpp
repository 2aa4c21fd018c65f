#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef CLI_BIN
#error "CLI_BIN must point at the hetpde binary"
#endif

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("hetpde_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run(const std::string& args, const std::string& log) {
    const std::string cmd = std::string("\"") + CLI_BIN + "\" " + args + " > \"" + log +
                            "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
#ifdef WIFEXITED
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -2;
#else
    return rc;
#endif
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    REQUIRE(out.good());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("version and argument errors") {
    TempDir tmp;
    CHECK(run("--version", tmp.sub("v.log")) == 0);
    CHECK(run("", tmp.sub("none.log")) == 2);
    CHECK(run("frobnicate", tmp.sub("bad.log")) == 2);
    CHECK(run("reconstruct --config " + tmp.sub("absent.cfg"), tmp.sub("cfg.log")) == 2);
}

TEST_CASE("test chart generation writes image, csv and manifest") {
    TempDir tmp;
    const std::string cfg = tmp.sub("chart.cfg");
    write_file(cfg,
               "[grid]\nwidth = 24\nheight = 18\n"
               "[stimulus]\nkind = contrast\nstrip_gray = 0.5\n");
    const std::string out = tmp.sub("out");
    REQUIRE(run("make-test-image --config " + cfg + " --out-dir " + out,
                tmp.sub("run.log")) == 0);

    CHECK(fs::exists(out + "/stimulus.png"));
    CHECK(fs::exists(out + "/stimulus.csv"));
    REQUIRE(fs::exists(out + "/manifest.txt"));
    const std::string manifest = slurp(out + "/manifest.txt");
    CHECK(manifest.find("command = make-test-image") != std::string::npos);
    CHECK(manifest.find("width = 24") != std::string::npos);

    // The chart is grayscale, so one csv carries all bands.
    CHECK_FALSE(fs::exists(out + "/stimulus_r.csv"));
}

TEST_CASE("reconstruct writes artifacts and its manifest reruns identically") {
    TempDir tmp;
    const std::string cfg = tmp.sub("rec.cfg");
    write_file(cfg,
               "[grid]\nwidth = 16\nheight = 16\n"
               "[stimulus]\nkind = smooth\n"
               "[operator]\np1 = 1\n"
               "[solver]\ndt = 0.1\ntolerance = 1e-4\nrecord_energy = on\n");
    const std::string out1 = tmp.sub("out1");
    REQUIRE(run("reconstruct --config " + cfg + " --out-dir " + out1, tmp.sub("r1.log")) == 0);

    CHECK(fs::exists(out1 + "/reconstruction.png"));
    CHECK(fs::exists(out1 + "/reconstruction.csv"));
    CHECK(fs::exists(out1 + "/stimulus.png"));
    REQUIRE(fs::exists(out1 + "/energy.csv"));
    REQUIRE(fs::exists(out1 + "/manifest.txt"));

    const std::string energy = slurp(out1 + "/energy.csv");
    CHECK(energy.rfind("0,", 0) == 0);
    CHECK(energy.find('\n') != std::string::npos);

    const std::string out2 = tmp.sub("out2");
    REQUIRE(run("reconstruct --config " + out1 + "/manifest.txt --out-dir " + out2,
                tmp.sub("r2.log")) == 0);
    CHECK(slurp(out2 + "/reconstruction.csv") == slurp(out1 + "/reconstruction.csv"));
    CHECK(slurp(out2 + "/energy.csv") == slurp(out1 + "/energy.csv"));

    // A manifest declares its command; feeding it to another one is an error.
    CHECK(run("green --config " + out1 + "/manifest.txt --out-dir " + tmp.sub("out3"),
              tmp.sub("r3.log")) == 2);
}

TEST_CASE("unknown config keys are rejected") {
    TempDir tmp;
    const std::string cfg = tmp.sub("typo.cfg");
    write_file(cfg, "[solver]\ndtt = 0.1\n");
    CHECK(run("reconstruct --config " + cfg + " --out-dir " + tmp.sub("out"),
              tmp.sub("run.log")) == 2);
    CHECK(slurp(tmp.sub("run.log")).find("solver.dtt") != std::string::npos);
}

TEST_CASE("missing input image maps to the io exit code") {
    TempDir tmp;
    const std::string cfg = tmp.sub("io.cfg");
    write_file(cfg, "[io]\ninput = " + tmp.sub("nope.png") + "\n[solver]\ndt = 0.1\n");
    CHECK(run("reconstruct --config " + cfg + " --out-dir " + tmp.sub("out"),
              tmp.sub("run.log")) == 3);
}

TEST_CASE("divergent step size maps to the instability exit code") {
    TempDir tmp;
    const std::string cfg = tmp.sub("unstable.cfg");
    write_file(cfg,
               "[grid]\nwidth = 16\nheight = 16\n"
               "[stimulus]\nkind = smooth\n"
               "[solver]\ndt = 2.0\n");
    CHECK(run("reconstruct --config " + cfg + " --out-dir " + tmp.sub("out"),
              tmp.sub("run.log")) == 4);
}

TEST_CASE("impulse response command exports field, contours and summary") {
    TempDir tmp;
    const std::string cfg = tmp.sub("green.cfg");
    write_file(cfg,
               "[grid]\nwidth = 17\nheight = 17\n"
               "[operator]\np1 = 1\n"
               "[solver]\ndt = 0.1\n");
    const std::string out = tmp.sub("out");
    REQUIRE(run("green --config " + cfg + " --out-dir " + out, tmp.sub("run.log")) == 0);

    CHECK(fs::exists(out + "/green.csv"));
    CHECK(fs::exists(out + "/green.png"));
    CHECK(fs::exists(out + "/green_contours.csv"));
    REQUIRE(fs::exists(out + "/green_summary.txt"));
    const std::string summary = slurp(out + "/green_summary.txt");
    CHECK(summary.find("anisotropy_ratio:") != std::string::npos);
    CHECK(summary.find("log_fit_r_squared:") != std::string::npos);
    CHECK(slurp(out + "/green_contours.csv").rfind("level,polyline,x,y", 0) == 0);
}

TEST_CASE("coefficient experiment passes on the uniform medium") {
    TempDir tmp;
    const std::string cfg = tmp.sub("hom.cfg");
    write_file(cfg,
               "[homogenize]\nepsilons = 0.125\nseeds = 42\ndelta = 1.0\n"
               "check_a0_target = 0.25\ncheck_a0_band = 0.05\n"
               "check_anisotropy_band = 0.25\n");
    const std::string out = tmp.sub("out");
    REQUIRE(run("homogenize --config " + cfg + " --out-dir " + out, tmp.sub("run.log")) == 0);

    REQUIRE(fs::exists(out + "/homogenization.csv"));
    CHECK(slurp(out + "/homogenization.csv")
              .rfind("epsilon,l2_error,fitted_a0,anisotropy", 0) == 0);
    const std::string summary = slurp(out + "/homogenize_summary.txt");
    CHECK(summary.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("coefficient experiment failure maps to the validation exit code") {
    TempDir tmp;
    const std::string cfg = tmp.sub("hom.cfg");
    write_file(cfg,
               "[homogenize]\nepsilons = 0.25,0.125\nseeds = 5,6\n"
               "check_a0_target = 10\n");
    const std::string out = tmp.sub("out");
    CHECK(run("homogenize --config " + cfg + " --out-dir " + out, tmp.sub("run.log")) == 5);
    const std::string summary = slurp(out + "/homogenize_summary.txt");
    CHECK(summary.find("check fitted_a0_target: FAIL") != std::string::npos);
    CHECK(summary.find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("derivative command exports the operator output") {
    TempDir tmp;
    const std::string cfg = tmp.sub("diff.cfg");
    write_file(cfg,
               "[grid]\nwidth = 16\nheight = 16\n"
               "[stimulus]\nkind = smooth\n"
               "[operator]\np1 = 1\n");
    const std::string out = tmp.sub("out");
    REQUIRE(run("differentiate --config " + cfg + " --out-dir " + out, tmp.sub("run.log")) == 0);
    CHECK(fs::exists(out + "/forward.png"));
    CHECK(fs::exists(out + "/forward.csv"));
    CHECK(fs::exists(out + "/manifest.txt"));
}

TEST_CASE("orientation map export and the seed override flag") {
    TempDir tmp;
    const std::string cfg = tmp.sub("map.cfg");
    write_file(cfg,
               "[grid]\nwidth = 32\nheight = 32\n"
               "[operator]\ntheta = saltpepper\ntheta_seed = 3\n");

    const std::string out1 = tmp.sub("m1");
    REQUIRE(run("make-map --config " + cfg + " --out-dir " + out1, tmp.sub("m1.log")) == 0);
    CHECK(fs::exists(out1 + "/map.png"));
    REQUIRE(fs::exists(out1 + "/map.csv"));

    // Same config, same bytes.
    const std::string out2 = tmp.sub("m2");
    REQUIRE(run("make-map --config " + cfg + " --out-dir " + out2, tmp.sub("m2.log")) == 0);
    CHECK(slurp(out2 + "/map.csv") == slurp(out1 + "/map.csv"));

    // --seed overrides the configured seed, changing the map.
    const std::string out3 = tmp.sub("m3");
    REQUIRE(run("make-map --config " + cfg + " --seed 77 --out-dir " + out3,
                tmp.sub("m3.log")) == 0);
    CHECK(slurp(out3 + "/map.csv") != slurp(out1 + "/map.csv"));
}
