#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = caustica::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / ("caustica_cli_" + name);
    std::ofstream(path) << content;
    return path.string();
}

// data rows of a CSV output, skipping the schema and column lines
std::vector<std::vector<double>> rows(const std::string& csv) {
    std::vector<std::vector<double>> r;
    std::istringstream in(csv);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (n++ < 2) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(cell.empty() ? NAN : std::stod(cell));
        r.push_back(row);
    }
    return r;
}

}  // namespace

TEST_CASE("poritsky-check on the ellipse passes") {
    Run r = run({"poritsky-check", "--curve", "ellipse:a=2,b=1", "--p", "1e-3", "--samples", "50"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("# schema: p [length]", 0) == 0);
    CHECK(r.err.rfind("PASS poritsky-check: max deviation of t-increments", 0) == 0);
    auto data = rows(r.out);
    REQUIRE(data.size() == 1);
    CHECK(data[0][2] < 1e-6);
}

TEST_CASE("jet-ode rebuilds the unit circle from its 4-jet") {
    Run r = run({"jet-ode", "--jet", "0,0,0,1,0,3", "--range", "0.1"});
    CHECK(r.code == 0);
    auto data = rows(r.out);
    REQUIRE(data.size() == 21);
    for (const auto& row : data) CHECK(std::abs(row[1] - (1.0 - std::sqrt(1.0 - row[0] * row[0]))) < 1e-5);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run({"string", "--no-such-flag", "1"}).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"poritsky-check", "--p", "abc"}).code == 2);
    CHECK(run({"poritsky-check", "--p", "-1e-3"}).code == 2);
    CHECK(run({"string", "--p", "0"}).code == 2);
    CHECK(run({"string", "--curve", "triangle:r=1"}).code == 2);
    CHECK(run({"jet-ode", "--jet", "0,0,1"}).code == 2);
    CHECK(run({"poritsky-check", "--format", "xml"}).code == 2);
    CHECK(run({"verify-all", "--only", "99"}).code == 2);
}

TEST_CASE("help exits with code 0") { CHECK(run({"--help"}).code == 0); }

TEST_CASE("failed checks exit with code 1") {
    Run r = run({"incidence", "--curve", "quartic:r=1"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("FAIL incidence:", 0) == 0);
}

TEST_CASE("command-line flags override config values") {
    const std::string cfg = temp_file("precedence.cfg", "# string settings\np = 1e-4\nsamples = 5\n\ncurve = circle:r=1\n");
    SUBCASE("config alone") {
        Run r = run({"string", "--config", cfg});
        REQUIRE(r.code == 0);
        auto data = rows(r.out);
        REQUIRE(data.size() == 5);
        // on the unit circle L = 2 (tan(theta) - theta) with s_b - s_a = 2 theta
        const double th = (data[0][1] - data[0][0]) / 2.0;
        CHECK(2.0 * (std::tan(th) - th) == doctest::Approx(1e-4).epsilon(1e-8));
    }
    SUBCASE("flag after the config option") {
        Run r = run({"string", "--config", cfg, "--samples", "7"});
        REQUIRE(r.code == 0);
        CHECK(rows(r.out).size() == 7);
    }
    SUBCASE("flag before the config option") {
        Run r = run({"string", "--samples", "9", "--config=" + cfg});
        REQUIRE(r.code == 0);
        CHECK(rows(r.out).size() == 9);
    }
}

TEST_CASE("malformed config files exit with code 2 naming the key") {
    const std::string bad = temp_file("bad_key.cfg", "p = 1e-3\nsmaples = 5\n");
    Run r = run({"string", "--config", bad});
    CHECK(r.code == 2);
    CHECK(r.err.find("smaples") != std::string::npos);
    const std::string no_eq = temp_file("no_eq.cfg", "samples 5\n");
    CHECK(run({"string", "--config", no_eq}).code == 2);
    CHECK(run({"string", "--config", "/nonexistent/caustica.cfg"}).code == 2);
    // a key of another subcommand is unknown here
    const std::string other = temp_file("other_key.cfg", "jet = 0,0,0,1,0,3\n");
    CHECK(run({"string", "--config", other}).code == 2);
}

TEST_CASE("identical configuration gives byte-identical output") {
    const std::vector<std::string> args = {"poritsky-check", "--p", "1e-4,1e-3", "--samples", "20"};
    setenv("CAUSTICA_THREADS", "1", 1);
    Run a = run(args);
    setenv("CAUSTICA_THREADS", "3", 1);
    Run b = run(args);
    unsetenv("CAUSTICA_THREADS");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
    Run c = run({"string", "--method", "bisector-ode", "--samples", "16"}), d = run({"string", "--method", "bisector-ode", "--samples", "16"});
    CHECK(c.out == d.out);
}

TEST_CASE("JSON summary and output file") {
    const auto path = std::filesystem::temp_directory_path() / "caustica_cli_summary.json";
    std::filesystem::remove(path);
    Run r = run({"surface", "--surface", "hyperbolic", "--format", "json", "--out", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    auto j = nlohmann::json::parse(in);
    CHECK(j["quantity"].is_string());
    CHECK(j["value"].get<double>() < 1e-6);
    CHECK(j["tolerance"].get<double>() == 1e-6);
    CHECK(j["pass"].get<bool>());
}
