#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decaylab/cli.hpp"

using namespace decaylab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "decaylab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::string last_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    return last;
}

std::string without_output_dir(const std::string& text) {
    std::istringstream in(text);
    std::string line, kept;
    while (std::getline(in, line))
        if (line.rfind("output.dir", 0) != 0) kept += line + '\n';
    return kept;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kSmallConfig =
    "[mesh]\nn = 40\n"
    "[sim]\nt_end = 10\nrecord_every = 5\n"
    "[ode]\nbeta = 3\n"
    "[b]\namplitude_fraction = 0.3\n";

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto p = dir / "run.toml";
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({"verify", "--config", "/nonexistent/run.toml"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"verify"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"decay-ode", "--law", "cubic"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("decay-ode on the quadratic instance") {
    TempDir tmp("decaylab_cli_decay");
    const auto r = cli({"decay-ode", "--law", "quadratic_test", "--beta", "2", "--phi0", "1", "--t-end", "4",
                        "--out", tmp.path.string()});
    CHECK(r.code == 0);
    const auto csv = tmp.path / "decay.csv";
    REQUIRE(fs::exists(csv));
    CHECK(first_line(csv) == "t,phi,theta,theta_bound,psi");
    std::istringstream row(last_line(csv));
    std::string t, phi;
    std::getline(row, t, ',');
    std::getline(row, phi, ',');
    CHECK(std::stod(t) == 4.0);
    CHECK(std::stod(phi) == doctest::Approx(2.2360680).epsilon(1e-7));
    CHECK(fs::exists(tmp.path / "audit.txt"));
}

TEST_CASE("check-a2 exit codes follow the verdict") {
    const auto ok = cli({"check-a2", "--law", "polynomial", "--p", "2", "--beta", "2"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("verdict = PASS") != std::string::npos);
    const auto bad = cli({"check-a2", "--law", "polynomial", "--p", "2", "--beta", "1.5"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("verdict = FAIL") != std::string::npos);
}

TEST_CASE("simulate and verify write their outputs") {
    TempDir tmp("decaylab_cli_verify");
    const auto cfg = write_config(tmp.path, kSmallConfig);

    const auto sim_dir = tmp.path / "sim";
    CHECK(cli({"simulate", "--config", cfg.string(), "--out", sim_dir.string()}).code == 0);
    CHECK(first_line(sim_dir / "energy.csv") == "t,E_uv,E_high,diss_cum,phi,envelope,X_diag");

    const auto ver_dir = tmp.path / "ver";
    const auto r = cli({"verify", "--config", cfg.string(), "--out", ver_dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("overall") != std::string::npos);
    for (const char* f : {"energy.csv", "decay.csv", "verdicts.csv", "summary.txt", "plot.gp"})
        CHECK(fs::exists(ver_dir / f));
    CHECK(first_line(ver_dir / "verdicts.csv") == "criterion,verdict,value,threshold,detail");

    // Same inputs, same bytes (the summary echoes its own output.dir).
    const auto again = tmp.path / "again";
    CHECK(cli({"verify", "--config", cfg.string(), "--out", again.string()}).code == 0);
    for (const char* f : {"energy.csv", "decay.csv", "verdicts.csv"}) {
        CAPTURE(f);
        CHECK(slurp(ver_dir / f) == slurp(again / f));
    }
    CHECK(without_output_dir(slurp(ver_dir / "summary.txt")) == without_output_dir(slurp(again / "summary.txt")));
}

TEST_CASE("a failing verdict exits with 1") {
    TempDir tmp("decaylab_cli_fail");
    // An exponent the run cannot reach.
    const auto cfg = write_config(tmp.path, std::string(kSmallConfig) + "[verify]\nmax_exponent = -50\n");
    CHECK(cli({"verify", "--config", cfg.string(), "--out", (tmp.path / "o").string()}).code == 1);
}

TEST_CASE("config errors exit with 2") {
    TempDir tmp("decaylab_cli_cfg");
    const auto cfg = write_config(tmp.path, "[mesh]\nn = 0\n");
    const auto r = cli({"verify", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("mesh.n") != std::string::npos);
}

TEST_CASE("sweep writes one directory per point and a manifest") {
    TempDir tmp("decaylab_cli_sweep");
    const auto cfg = write_config(tmp.path, kSmallConfig);
    const auto root = tmp.path / "sweep";
    const auto r = cli({"sweep", "--config", cfg.string(), "--param", "b.amplitude_fraction=0.1,0.3",
                        "--workers", "2", "--out", root.string()});
    CHECK(r.code == 0);
    REQUIRE(fs::exists(root / "manifest.csv"));
    CHECK(first_line(root / "manifest.csv")
          == "index,dir,b.amplitude_fraction,status,exit_code,C_cal,max_violation_upper,fitted_exponent");
    CHECK(fs::exists(root / "point_0000" / "energy.csv"));
    CHECK(fs::exists(root / "point_0001" / "energy.csv"));
    std::ifstream in(root / "manifest.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    while (std::getline(in, line))
        if (!line.empty()) {
            ++rows;
            CHECK(line.find(",pass,0,") != std::string::npos);
        }
    CHECK(rows == 2);
}
