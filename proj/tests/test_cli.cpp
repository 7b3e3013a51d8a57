#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "kg/experiments.hpp"

using namespace kg;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("kgman_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kCheapPhase =
    "model.m = 0.5\n"
    "model.p = 1\n"
    "model.N = 4\n"
    "phase.T = 6\n"
    "phase.T_eta = 6\n"
    "phase.dt = 1e-3\n";
}  // namespace

TEST_CASE("config parsing") {
    fs::path dir = scratch_dir("cfg");

    SUBCASE("valid file with comments and blank lines") {
        fs::path p = write_config(dir, "ok.cfg",
                                  "# comment\n"
                                  "model.m = 0.5\n"
                                  "\n"
                                  "model.N=6   # trailing comment\n"
                                  "phase.T = 12\n");
        ExperimentConfig cfg = ExperimentConfig::from_file("phase-portrait", p.string());
        CHECK(cfg.getd("model.m", 0.0) == 0.5);
        CHECK(cfg.geti("model.N", 0) == 6);
        CHECK(cfg.getd("phase.T", 0.0) == 12.0);
        CHECK(cfg.getd("model.p", 7.0) == 7.0);  // fallback for absent key
    }

    SUBCASE("unknown key is rejected") {
        fs::path p = write_config(dir, "bad_key.cfg", "model.mass = 0.5\n");
        CHECK_THROWS_AS(ExperimentConfig::from_file("phase-portrait", p.string()), ConfigError);
    }

    SUBCASE("malformed number is rejected") {
        fs::path p = write_config(dir, "bad_num.cfg", "model.m = fast\n");
        ExperimentConfig cfg = ExperimentConfig::from_file("phase-portrait", p.string());
        CHECK_THROWS_AS(cfg.getd("model.m", 0.0), ConfigError);
    }

    SUBCASE("line without equals sign is rejected") {
        fs::path p = write_config(dir, "bad_line.cfg", "model.m 0.5\n");
        CHECK_THROWS_AS(ExperimentConfig::from_file("phase-portrait", p.string()), ConfigError);
    }

    SUBCASE("list values") {
        fs::path p = write_config(dir, "list.cfg", "het.norms = 1e-4, 3e-4, 1e-3\n");
        ExperimentConfig cfg = ExperimentConfig::from_file("heteroclinic", p.string());
        auto v = cfg.getlist("het.norms", {});
        REQUIRE(v.size() == 3);
        CHECK(v[1] == 3e-4);
    }

    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    fs::path dir = scratch_dir("codes");
    fs::path cfg = write_config(dir, "phase.cfg", kCheapPhase);

    CHECK(run_cli("no-such-experiment", cfg.string(), (dir / "o").string(), 1) == 1);
    CHECK(run_cli("phase-portrait", (dir / "missing.cfg").string(), (dir / "o").string(), 1) == 2);

    // a tolerance nobody can meet trips the in-run assertion
    fs::path strict = write_config(dir, "strict.cfg",
                                   "model.m = 0.5\n"
                                   "model.p = 1\n"
                                   "model.N = 4\n"
                                   "track.T = 4\n"
                                   "track.tol = 1e-30\n");
    CHECK(run_cli("homoclinic-track", strict.string(), (dir / "s").string(), 1) == 3);

    fs::remove_all(dir);
}

TEST_CASE("phase portrait run produces plots with sibling tables") {
    fs::path dir = scratch_dir("run");
    fs::path cfg = write_config(dir, "phase.cfg", kCheapPhase);
    fs::path out = dir / "out";

    REQUIRE(run_cli("phase-portrait", cfg.string(), out.string(), 1) == 0);
    REQUIRE(fs::exists(out));

    bool any_svg = false;
    for (const auto& e : fs::directory_iterator(out)) {
        if (e.path().extension() == ".svg") {
            any_svg = true;
            fs::path csv = e.path();
            csv.replace_extension(".csv");
            CHECK(fs::exists(csv));
            const std::string svg = slurp(e.path());
            CHECK(svg.rfind("<svg", 0) == 0);
            CHECK(svg.find("</svg>") != std::string::npos);
        }
    }
    CHECK(any_svg);

    fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical") {
    fs::path dir = scratch_dir("determinism");
    fs::path cfg = write_config(dir, "phase.cfg", kCheapPhase);
    fs::path out1 = dir / "r1";
    fs::path out2 = dir / "r2";

    REQUIRE(run_cli("phase-portrait", cfg.string(), out1.string(), 1) == 0);
    REQUIRE(run_cli("phase-portrait", cfg.string(), out2.string(), 2) == 0);

    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(out1)) {
        if (e.path().extension() != ".csv") continue;
        fs::path other = out2 / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(e.path()) == slurp(other));
        ++compared;
    }
    CHECK(compared > 0);

    fs::remove_all(dir);
}

TEST_CASE("output directory falls back to the environment") {
    fs::path dir = scratch_dir("env");
    fs::path cfg = write_config(dir, "phase.cfg", kCheapPhase);
    fs::path out = dir / "from_env";

    setenv("KGMAN_OUT", out.string().c_str(), 1);
    REQUIRE(run_cli("phase-portrait", cfg.string(), "", 1) == 0);
    unsetenv("KGMAN_OUT");
    CHECK(fs::exists(out));

    bool any_csv = false;
    for (const auto& e : fs::directory_iterator(out))
        if (e.path().extension() == ".csv") any_csv = true;
    CHECK(any_csv);

    fs::remove_all(dir);
}
