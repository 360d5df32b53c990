// End-to-end tests of the command line interface: golden outputs, exit codes,
// and the generate/pixelate/render/compare flows.  Each test shells out to the
// real binary.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "homog/geometry.hpp"
#include "homog/grid.hpp"
#include "homog/io.hpp"
#include "homog/sha256.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(HOMOG_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    CliResult result;
    if (pipe == nullptr) return result;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        result.output.append(buf, got);
    }
    const int status = pclose(pipe);
    result.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string data_file(const std::string& name) {
    return std::string(HOMOG_TEST_DATA_DIR) + "/" + name;
}

// Unique scratch directory per process so parallel test runs cannot collide.
fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("homog_cli_test_" + std::to_string(static_cast<long>(getpid())));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("solve emits a deterministic json document") {
    const std::string args = "solve " + data_file("case1.csv") + " --no-timing";
    const CliResult first = run_cli(args);
    const CliResult second = run_cli(args);
    REQUIRE(first.exit_code == 0);
    CHECK(first.output == second.output);

    const homog::ResultDocument doc = homog::result_from_json(first.output);
    CHECK(doc.method == "sa");
    CHECK(!doc.include_timing);
    REQUIRE(doc.params.size() == 3);
    CHECK(doc.params[0] == std::pair<std::string, std::size_t>{"neig", 29});
    CHECK(doc.params[1] == std::pair<std::string, std::size_t>{"nx", 16});
    CHECK(doc.params[2] == std::pair<std::string, std::size_t>{"ny", 16});

    CHECK(doc.tensor.d11 == doctest::Approx(0.6474).epsilon(1e-3));
    CHECK(doc.tensor.d22 == doctest::Approx(doc.tensor.d11).epsilon(1e-8));
    CHECK(doc.eigen.lambda1 <= doc.eigen.lambda2);

    // The document's grid hash matches the canonical hash of the input grid.
    const homog::BlockGrid grid = homog::read_grid(data_file("case1.csv"));
    CHECK(doc.grid_sha256 == homog::sha256_hex(homog::canonical_grid_json(grid)));
}

TEST_CASE("solve supports the finite-volume method and csv output") {
    const CliResult fvm =
        run_cli("solve " + data_file("case1.csv") + " --method fvm --nf 64 --no-timing");
    REQUIRE(fvm.exit_code == 0);
    const homog::ResultDocument doc = homog::result_from_json(fvm.output);
    CHECK(doc.method == "fvm");
    CHECK(doc.tensor.d11 == doctest::Approx(0.6483).epsilon(1e-3));

    const CliResult csv =
        run_cli("solve " + data_file("case1.csv") + " --out csv --no-timing");
    REQUIRE(csv.exit_code == 0);
    CHECK(csv.output.rfind("method,params,d11", 0) == 0);
    CHECK(csv.output.find("sa,neig=29;nx=16;ny=16,") != std::string::npos);
}

TEST_CASE("solve writes to a file when asked") {
    const fs::path out = scratch_dir() / "result.json";
    const CliResult r = run_cli("solve " + data_file("case3.csv") + " --no-timing --output " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.empty());
    const homog::ResultDocument doc = homog::result_from_json(slurp(out));
    CHECK(doc.tensor.d11 == doctest::Approx(0.775).epsilon(1e-3));
    CHECK(doc.tensor.d22 == doctest::Approx(0.307692).epsilon(1e-3));
}

TEST_CASE("cli exit codes distinguish validation, solver, and io failures") {
    // Missing input file: I/O error.
    CHECK(run_cli("solve /nonexistent/grid.csv").exit_code == 3);

    // Unknown method: rejected while parsing options.
    CHECK(run_cli("solve " + data_file("case1.csv") + " --method magic").exit_code == 1);

    // Unknown subcommand and missing required option.
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("generate checkerboard --m 4").exit_code == 1);

    // Parameters outside the admissible truncation window: validation error.
    CHECK(run_cli("solve " + data_file("case1.csv") + " --neig 7").exit_code == 1);
    CHECK(run_cli("solve " + data_file("case1.csv") + " --nx 0").exit_code == 1);
    CHECK(run_cli("solve " + data_file("case1.csv") + " --neig abc").exit_code == 1);

    // Misaligned finite-volume node set: validation error.
    CHECK(run_cli("solve " + data_file("case1.csv") + " --method fvm --nf 12").exit_code == 1);

    // Unwritable output path: I/O error.
    CHECK(run_cli("solve " + data_file("case1.csv") + " --output /nonexistent/dir/out.json")
              .exit_code == 3);

    // Help exits cleanly.
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("solve --help").exit_code == 0);
}

TEST_CASE("generate checkerboard reproduces the library generator") {
    const fs::path out = scratch_dir() / "checker.csv";
    const CliResult r =
        run_cli("generate checkerboard --m 4 --output " + out.string());
    REQUIRE(r.exit_code == 0);
    const homog::BlockGrid grid = homog::read_grid(out.string());
    const homog::BlockGrid expected = homog::checkerboard(4, 0.1, 1.0);
    CHECK(grid.D == expected.D);

    CHECK(run_cli("generate checkerboard --m 1 --output " + out.string()).exit_code == 1);
}

TEST_CASE("generate aggregate is reproducible per seed") {
    const fs::path out_a = scratch_dir() / "agg_a.csv";
    const fs::path out_b = scratch_dir() / "agg_b.csv";
    const std::string opts = "generate aggregate --m 8 --iters 3 --seed 42 --output ";
    REQUIRE(run_cli(opts + out_a.string()).exit_code == 0);
    REQUIRE(run_cli(opts + out_b.string()).exit_code == 0);
    CHECK(slurp(out_a) == slurp(out_b));

    const homog::BlockGrid grid = homog::read_grid(out_a.string());
    const homog::BlockGrid expected = homog::aggregate_random({8, 3, 42, 0.1, 1.0});
    CHECK(grid.D == expected.D);

    CHECK(run_cli("generate aggregate --m 7 --seed 1 --output " + out_a.string()).exit_code ==
          1);
}

TEST_CASE("pixelate downsamples a generated grid") {
    const fs::path fine_path = scratch_dir() / "fine.csv";
    const fs::path coarse_path = scratch_dir() / "coarse.csv";
    REQUIRE(run_cli("generate aggregate --m 8 --iters 2 --seed 5 --output " +
                    fine_path.string())
                .exit_code == 0);
    REQUIRE(run_cli("pixelate " + fine_path.string() + " --r 4 --output " +
                    coarse_path.string())
                .exit_code == 0);

    const homog::BlockGrid fine = homog::read_grid(fine_path.string());
    const homog::BlockGrid coarse = homog::read_grid(coarse_path.string());
    const homog::BlockGrid expected = homog::pixelate(fine, 4, 0.1, 1.0);
    REQUIRE(coarse.m == 4);
    CHECK(coarse.D == expected.D);

    // r must divide the fine resolution.
    CHECK(run_cli("pixelate " + fine_path.string() + " --r 3 --output " +
                  coarse_path.string())
              .exit_code == 1);
}

TEST_CASE("render writes a pgm image") {
    const fs::path grid_path = scratch_dir() / "render_me.csv";
    const fs::path img_path = scratch_dir() / "img.pgm";
    REQUIRE(run_cli("generate checkerboard --m 2 --output " + grid_path.string())
                .exit_code == 0);
    REQUIRE(run_cli("render " + grid_path.string() + " --out " + img_path.string() +
                    " --scale 2")
                .exit_code == 0);

    const std::string bytes = slurp(img_path);
    const std::string header = "P5\n4 4\n255\n";
    REQUIRE(bytes.size() == header.size() + 16);
    CHECK(bytes.compare(0, header.size(), header) == 0);
    // Top-left block is the low phase: dark patch.
    CHECK(static_cast<unsigned char>(bytes[header.size()]) == 26);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 26);
    CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 255);
}

TEST_CASE("compare prints a convergence table") {
    const CliResult r = run_cli("compare " + data_file("case1.csv") +
                                " --resolutions 2 4 --benchmark-nf 16");
    REQUIRE(r.exit_code == 0);

    std::istringstream lines(r.output);
    std::string banner, header, row2, row4;
    REQUIRE(std::getline(lines, banner));
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row2));
    REQUIRE(std::getline(lines, row4));
    CHECK(banner.rfind("# benchmark nf=16 tensor=[[", 0) == 0);
    CHECK(header.rfind("nx,nf,sa_d11", 0) == 0);
    CHECK(row2.rfind("2,16,", 0) == 0);
    CHECK(row4.rfind("4,32,", 0) == 0);
}
