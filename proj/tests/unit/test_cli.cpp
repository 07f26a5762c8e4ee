#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = snic::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("snic_cli_test_" + name);
}

int lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("help exits successfully") {
    const Run r = run({"--help"});
    CHECK(r.code == snic::cli::ok);
    CHECK(r.out.find("equilibria") != std::string::npos);
    CHECK(run({"scan", "--help"}).code == snic::cli::ok);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == snic::cli::usage);
    const Run unknown = run({"frobnicate"});
    CHECK(unknown.code == snic::cli::usage);
    CHECK(unknown.err.find("unknown subcommand 'frobnicate'") != std::string::npos);
    const Run flag = run({"equilibria", "--bogus", "1"});
    CHECK(flag.code == snic::cli::usage);
    CHECK(flag.err.find("unrecognized argument '--bogus'") != std::string::npos);
    CHECK(run({"equilibria", "--mu1", "abc"}).code == snic::cli::usage);
    CHECK(run({"equilibria", "--family", "torus"}).code == snic::cli::usage);
    CHECK(run({"scan", "--preset", "nope"}).code == snic::cli::usage);
    CHECK(run({"scan", "--nx", "1"}).code == snic::cli::usage);
}

TEST_CASE("numerical failures exit with 2") {
    const Run r = run({"trace", "--mu1", "0.05", "--mu2", "0.05"});
    CHECK(r.code == snic::cli::numerical);
    CHECK(r.err.find("numerical failure") != std::string::npos);
}

TEST_CASE("equilibria as CSV and JSON") {
    const Run csv = run({"equilibria", "--family", "uncoupled", "--mu1", "-0.04", "--mu2", "-0.04"});
    REQUIRE(csv.code == snic::cli::ok);
    CHECK(csv.out.rfind("x1,x2,kind", 0) == 0);
    CHECK(lines(csv.out) == 5);
    const Run json = run({"equilibria", "--family", "uncoupled", "--mu1", "-0.04", "--mu2", "-0.04", "--format", "json"});
    REQUIRE(json.code == snic::cli::ok);
    const auto j = nlohmann::json::parse(json.out);
    CHECK(j.size() == 4);
}

TEST_CASE("curves subcommand") {
    const Run r = run({"curves", "--n", "11"});
    REQUIRE(r.code == snic::cli::ok);
    CHECK(lines(r.out) >= 12);
}

TEST_CASE("scan writes CSV, JSON and SVG") {
    const auto csv = temp_file("scan.csv"), json = temp_file("scan.json"), svg = temp_file("scan.svg");
    const Run r = run({"scan", "--preset", "box-counts", "--nx", "21", "--ny", "21", "--out", csv.string(), "--json",
                       json.string(), "--svg", svg.string()});
    REQUIRE(r.code == snic::cli::ok);
    std::ifstream c(csv), j(json), s(svg);
    std::stringstream cs, ss;
    cs << c.rdbuf();
    ss << s.rdbuf();
    CHECK(lines(cs.str()) == 1 + 21 * 21);
    const auto doc = nlohmann::json::parse(j);
    CHECK(doc["grid"]["nx"] == 21);
    CHECK(doc["name"] == "box-counts");
    CHECK(ss.str().find("<svg") != std::string::npos);
    for (const auto& p : {csv, json, svg}) std::filesystem::remove(p);
}

TEST_CASE("explicit options override the preset") {
    const Run r = run({"scan", "--preset", "uncoupled-counts", "--nx", "3", "--ny", "3", "--mu1-lo", "-0.2"});
    REQUIRE(r.code == snic::cli::ok);
    CHECK(r.out.find("-0.20000000000000001,") != std::string::npos);
    CHECK(lines(r.out) == 10);
}

TEST_CASE("config files merge with command-line flags") {
    const auto cfg = temp_file("scan.cfg");
    {
        std::ofstream f(cfg);
        f << "# small scan\npreset = \"uncoupled-counts\"\nnx = 4\nny = 4\nno_continuation = true\n";
    }
    const Run a = run({"scan", "--config", cfg.string()});
    REQUIRE(a.code == snic::cli::ok);
    CHECK(lines(a.out) == 17);
    const Run b = run({"scan", "--config", cfg.string(), "--nx", "2"});
    REQUIRE(b.code == snic::cli::ok);
    CHECK(lines(b.out) == 9);
    {
        std::ofstream f(cfg);
        f << "bogus_key = 3\n";
    }
    const Run c = run({"scan", "--config", cfg.string()});
    CHECK(c.code == snic::cli::usage);
    CHECK(c.err.find("--bogus-key") != std::string::npos);
    std::filesystem::remove(cfg);
    CHECK(run({"scan", "--config", cfg.string()}).code == snic::cli::usage);
}

TEST_CASE("scans are reproducible across thread counts") {
    const std::vector<std::string> base{"scan", "--preset", "explicit-regimes", "--nx", "4", "--ny", "4"};
    auto with = [&](const char* t) {
        auto a = base;
        a.insert(a.end(), {"--threads", t});
        return run(a);
    };
    const Run one = with("1"), many = with("4");
    REQUIRE(one.code == snic::cli::ok);
    CHECK(one.out == many.out);
}

TEST_CASE("tartan subcommand") {
    const Run r = run({"tartan", "--family", "explicit", "--delta1", "0.01", "--delta2", "0.006", "--mu1", "-0.05",
                       "--mu2", "-0.05"});
    REQUIRE(r.code == snic::cli::ok);
    CHECK(r.out.find("basic_tartan true") != std::string::npos);
    const Run above = run({"tartan", "--family", "explicit", "--delta1", "0.01", "--delta2", "0.006", "--mu1", "0.05",
                           "--mu2", "0.05"});
    REQUIRE(above.code == snic::cli::ok);
    CHECK(above.out.find("basic_tartan false") != std::string::npos);
}

TEST_CASE("trace and transit subcommands") {
    const Run t = run({"trace", "--branch", "D"});
    REQUIRE(t.code == snic::cli::ok);
    CHECK(t.out.find("sink_translate") != std::string::npos);
    const Run x = run({"transit", "--eta", "0.05", "--n", "5"});
    REQUIRE(x.code == snic::cli::ok);
    CHECK(x.out.rfind("eta,x1,case", 0) == 0);
}

TEST_CASE("winding subcommand") {
    const Run r = run({"winding", "--n", "3"});
    REQUIRE(r.code == snic::cli::ok);
    CHECK(lines(r.out) >= 4);
}
