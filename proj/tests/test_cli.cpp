#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "dyndet/cli.hpp"

namespace {

const std::string kConfigs = DYNDET_CONFIG_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dyndet::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string two_shift() { return kConfigs + "/two_shift.json"; }
std::string single_orbit() { return kConfigs + "/single_orbit.json"; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("dyndet_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("validate") {
    const auto r = call({"validate", "--config", two_shift()});
    CHECK(r.code == 0);
    CHECK(r.out == "0 violations, 0 warnings\n");
}

TEST_CASE("traces of the two-shift") {
    auto r = call({"traces", "--config", two_shift()});
    CHECK(r.code == 0);
    CHECK(r.out == "m,re_trace,im_trace\n1,4,0\n");
    r = call({"traces", "--config", two_shift(), "--m", "2"});
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(std::abs(std::stod(rows[2][1]) - 16.0 / 9.0) < 1e-15);
}

TEST_CASE("orbit table reproduces the traces") {
    const auto orbits = call({"orbits", "--config", two_shift(), "--m", "6"});
    REQUIRE(orbits.code == 0);
    const std::complex<double> z(0.5, 0.75);
    std::vector<std::complex<double>> s(6, 0.0);
    const auto rows = csv_rows(orbits.out);
    REQUIRE(rows.size() > 1);
    CHECK(rows[0][0] == "word");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const int m = std::stoi(rows[i][1]);
        const int prim = std::stoi(rows[i][2]);
        const double T = std::stod(rows[i][3]);
        const double det_factor = std::stod(rows[i][5]);
        const std::complex<double> lift(std::stod(rows[i][6]), std::stod(rows[i][7]));
        // every rotation of the class is a fixed word
        s[static_cast<std::size_t>(m - 1)] += double(prim) * lift / det_factor * std::exp(-z * T);
    }
    const auto traces = call({"traces", "--config", two_shift(), "--m", "6", "--z", "0.5,0.75"});
    const auto trows = csv_rows(traces.out);
    REQUIRE(trows.size() == 7);
    for (int m = 1; m <= 6; ++m) {
        const std::complex<double> t(std::stod(trows[static_cast<std::size_t>(m)][1]),
                                     std::stod(trows[static_cast<std::size_t>(m)][2]));
        CHECK(std::abs(t - s[static_cast<std::size_t>(m - 1)]) < 1e-12 * std::abs(t));
    }
}

TEST_CASE("determinant output is deterministic") {
    const auto a = call({"det", "--config", two_shift(), "--M", "10"});
    const auto b = call({"det", "--config", two_shift(), "--M", "10", "--threads", "1"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(csv_rows(a.out).size() == 29);
}

TEST_CASE("leading resonance of the truncated determinant") {
    const auto r = call({"resonances", "--config", two_shift(), "--M", "20", "--r", "0.5"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    CHECK(rows[0] == std::vector<std::string>{"re", "im", "multiplicity", "residual"});
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(std::stod(rows[1][0])) < 1e-8);
    CHECK(std::abs(std::stod(rows[1][1])) < 1e-8);
    CHECK(rows[1][2] == "1");
}

TEST_CASE("single orbit lattice") {
    const auto r = call({"single-orbit", "--config", single_orbit(), "--r", "1"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(std::stod(rows[1][0]) + std::log(2.0)) < 1e-14);
    CHECK(rows[1][2] == "1");
}

TEST_CASE("correction family with the singleton oracle") {
    const auto r = call({"bowen", "--config", two_shift()});
    REQUIRE(r.code == 0);
    CHECK(r.out == "k,length,vertices,edges,role\n(1),1,2,4,numerator\n");
}

TEST_CASE("counts and growth") {
    const auto c = call({"count", "--config", two_shift(), "--radii", "1,2,3,4,5"});
    REQUIRE(c.code == 0);
    const auto rows = csv_rows(c.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[1][1] == "3");

    const auto json_path = temp_path("growth.json");
    const auto g = call({"growth", "--config", two_shift(), "--json", json_path.string()});
    REQUIRE(g.code == 0);
    CHECK(g.out.find("alpha=") != std::string::npos);
    const auto doc = nlohmann::json::parse(slurp(json_path));
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["source"] == "closed_form");
    std::filesystem::remove(json_path);
}

TEST_CASE("frame determinant writes CSV and a JSON profile") {
    const auto csv_path = temp_path("frame.csv");
    const auto json_path = temp_path("frame.json");
    const auto r = call({"frame-det", "--config", two_shift(), "--L", "3", "--z", "4", "-o", csv_path.string(),
                         "--json", json_path.string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(slurp(csv_path));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][2] == "3");
    const auto doc = nlohmann::json::parse(slurp(json_path));
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["profiles"].size() == 1);
    std::filesystem::remove(csv_path);
    std::filesystem::remove(json_path);
}

TEST_CASE("bad input is reported") {
    const auto path = temp_path("bad.json");
    {
        std::ofstream f(path);
        f << R"({"symbols": ["a"], "adjacency": [[1]], "n": 3, "d": 1, "s": 2.0, "split": [1, 1], "bogus": 1})";
    }
    const auto r = call({"validate", "--config", path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
    std::filesystem::remove(path);

    CHECK(call({"validate", "--config", "/nonexistent/config.json"}).code == 1);
    CHECK(call({"traces"}).code == 1);
    CHECK(call({}).code == 1);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"orbits", "--config", two_shift(), "--m", "40"}).code == 1);
}

TEST_CASE("installed binary exit codes") {
    const std::string bin = DYNDET_CLI_PATH;
    CHECK(std::system((bin + " validate --config " + two_shift() + " > /dev/null").c_str()) == 0);
    const int bad = std::system((bin + " traces --config /nonexistent.json 2> /dev/null").c_str());
    REQUIRE(WIFEXITED(bad));
    CHECK(WEXITSTATUS(bad) == 1);
}
