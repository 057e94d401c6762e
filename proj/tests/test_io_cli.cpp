#include "covshrink/cli.hpp"
#include "covshrink/errors.hpp"
#include "covshrink/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace covshrink;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("covshrink_test_" + std::to_string(std::rand()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        const fs::path p = path / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

Json json_of(const Run& r) { return strip_timestamps(Json::parse(r.out)); }

}  // namespace

TEST_CASE("parse_csv examples") {
    const CsvDataset a = parse_csv("1,2\n3,4\n");
    CHECK(a.values.rows() == 2);
    CHECK(a.values(0, 1) == 2);
    CHECK(a.values(1, 0) == 3);

    const CsvDataset b = parse_csv("a,b\n1,2\n", {',', true});
    CHECK(b.values.rows() == 1);
    CHECK(b.column_names == std::vector<std::string>{"a", "b"});

    try {
        parse_csv("1,2\n3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("parse_csv error paths and dialect") {
    try {
        parse_csv("1,2\n3,x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 2);
    }
    CHECK_THROWS_AS(parse_csv(""), ParseError);
    CHECK_THROWS_AS(parse_csv("a,b\n", {',', true}), ParseError);
    CHECK_THROWS_AS(parse_csv("1,inf\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("1,nan\n"), ParseError);

    const CsvDataset c = parse_csv("\"1.5\";-2e3\r\n\r\n0.25;7\r\n", {';', false});
    CHECK(c.values.rows() == 2);
    CHECK(c.values(0, 0) == 1.5);
    CHECK(c.values(0, 1) == -2000);
    CHECK(c.values(1, 0) == 0.25);
    CHECK(parse_csv("0.1\n").values(0, 0) == 0.1);
}

TEST_CASE("read_csv and write_csv round trip") {
    TempDir dir;
    Matrix m(2, 3);
    m << 0.1, -2.5, 1e-300, 3, 1.0 / 3.0, 7;
    const std::string path = dir.write("m.csv", write_csv(m));
    const CsvDataset d = read_csv(path);
    CHECK(d.values == m);
    CHECK(d.path == path);
    CHECK_THROWS_AS(read_csv((dir.path / "missing.csv").string()), ParseError);
}

TEST_CASE("matrix and number JSON encoding") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Json j = matrix_to_json(m);
    CHECK(j["rows"] == 2);
    CHECK(j["cols"] == 3);
    CHECK(j["data"][1] == 2.0);
    CHECK(j["data"][3] == 4.0);
    CHECK(matrix_from_json(j) == m);
    CHECK(number_to_json(NAN).is_null());
    CHECK(std::isnan(number_from_json(Json())));
}

TEST_CASE("ReportDocument round trip") {
    ExperimentConfig c;
    c.model = parse_model("spiked:4,2", 5);
    c.n = 40;
    c.p = 5;
    c.replicates = 12;
    c.seed = 99;
    c.methods = {Method::sample, Method::tsai};
    const ExperimentReport r = run_experiment(ExperimentKind::risk_comparison, c);

    ReportDocument d;
    d.command = "simulate";
    d.seed = 99;
    d.config = to_json(c);
    d.results = to_json(r);
    d.timestamps["started"] = utc_now();
    const ReportDocument back = parse_report(serialize(d));
    CHECK(back == d);
    CHECK(serialize(back) == serialize(d));

    const ExperimentReport again = experiment_report_from_json(d.results);
    CHECK(to_json(again) == to_json(r));
    const ExperimentConfig cback = experiment_config_from_json(d.config);
    CHECK(to_json(cback) == to_json(c));

    Json bad = to_json(d);
    bad["schema_version"] = "2";
    CHECK_THROWS_AS(report_from_json(bad), ParseError);
    CHECK_THROWS_AS(parse_report("{not json"), ParseError);
}

TEST_CASE("round trip preserves NaN cells") {
    ExperimentConfig c;
    c.model = parse_model("identity", 8);
    c.n = 10;
    c.p = 8;
    c.replicates = 20;
    c.methods = {Method::tsai, Method::sample};
    const ExperimentReport r = run_experiment(ExperimentKind::risk_comparison, c);
    ReportDocument d;
    d.results = to_json(r);
    CHECK(parse_report(serialize(d)) == d);
}

TEST_CASE("strip_timestamps removes nested timestamp fields") {
    Json j = {{"a", 1}, {"timestamps", {{"x", "y"}}}, {"inner", {{"timestamps", 3}, {"b", 2}}}};
    const Json s = strip_timestamps(j);
    CHECK_FALSE(s.contains("timestamps"));
    CHECK_FALSE(s["inner"].contains("timestamps"));
    CHECK(s["inner"]["b"] == 2);
}

TEST_CASE("cli estimate on the p = 1 dataset") {
    TempDir dir;
    const std::string path = dir.write("d.csv", "1\n3\n");
    const Run r = cli({"estimate", "--method", "tsai", "--input", path, "--n-convention", "centered"});
    REQUIRE(r.code == kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(j["schema_version"] == "1");
    CHECK(j["command"] == "estimate");
    CHECK(j["results"]["sample_covariance"]["data"][0] == doctest::Approx(2.0));
    CHECK(j["results"]["estimate"]["matrix"]["data"][0] == doctest::Approx(2.0));
    CHECK(j["results"]["estimate"]["shrinkage_table"]["shrunk_eigenvalues"][0] ==
          doctest::Approx(2.0));
}

TEST_CASE("cli estimate methods, header and csv output") {
    TempDir dir;
    const std::string path = dir.write("d.csv", "x;y\n1;0\n0;2\n1;1\n3;1\n-1;2\n");
    for (const char* m : {"sample", "stein", "dp", "tsai"}) {
        const Run r = cli({"estimate", "--method", m, "--input", path, "--delimiter", ";", "--header"});
        CHECK(r.code == kExitOk);
    }
    const Run csv = cli({"--format", "csv", "estimate", "--method", "sample", "--input", path,
                         "--delimiter", ";", "--header", "--n-convention", "uncentered"});
    REQUIRE(csv.code == kExitOk);
    const CsvDataset back = parse_csv(csv.out);
    CHECK(back.values(0, 0) == doctest::Approx(12.0 / 5.0));
}

TEST_CASE("cli ttest") {
    TempDir dir;
    const std::string data = dir.write("d.csv", "1,0.5\n2,-1\n0.5,0.25\n3,1\n-0.5,0.75\n1,2\n");
    const std::string sigma = dir.write("s.csv", "1,0\n0,1\n");
    for (const char* m : {"hotelling", "decomposite"}) {
        const Run r = cli({"ttest", "--method", m, "--input", data});
        REQUIRE(r.code == kExitOk);
        const Json j = Json::parse(r.out);
        CHECK(j["results"]["statistic"].get<double>() > 0);
        CHECK(j["results"]["dof"] == 2);
    }
    const Run o = cli({"ttest", "--method", "oracle", "--input", data, "--sigma", sigma});
    REQUIRE(o.code == kExitOk);
    // n |xbar|^2 with xbar = (7/6, 7/12).
    CHECK(Json::parse(o.out)["results"]["statistic"] ==
          doctest::Approx(6 * (49.0 / 36 + 49.0 / 144)));
    CHECK(cli({"ttest", "--method", "oracle", "--input", data}).code == kExitUsage);
}

TEST_CASE("cli mp grid") {
    const Run r = cli({"mp", "--c", "0.25", "--points", "3"});
    REQUIRE(r.code == kExitOk);
    const CsvDataset t = parse_csv(r.out, {',', true});
    CHECK(t.column_names == std::vector<std::string>{"x", "density", "cdf"});
    REQUIRE(t.values.rows() == 3);
    CHECK(t.values(0, 0) == doctest::Approx(0.25));
    CHECK(t.values(1, 0) == doctest::Approx(1.25));
    CHECK(t.values(2, 0) == doctest::Approx(2.25));
    CHECK(t.values(0, 1) == 0);
    CHECK(t.values(1, 1) == doctest::Approx(0.509295817894065074).epsilon(1e-14));
    CHECK(t.values(2, 1) == 0);
    CHECK(t.values(0, 2) == 0);
    CHECK(t.values(2, 2) == 1);

    const Run j = cli({"--format", "json", "mp", "--c", "0.5", "--points", "5"});
    REQUIRE(j.code == kExitOk);
    CHECK(Json::parse(j.out)["results"]["grid"].size() == 5);
    CHECK(cli({"mp", "--c", "1.5"}).code == kExitNumeric);
}

TEST_CASE("cli risk") {
    const Run r = cli({"risk", "--closed-form", "--n", "10", "--p", "3"});
    REQUIRE(r.code == kExitOk);
    const Json cf = Json::parse(r.out)["results"]["closed_form"];
    CHECK(cf["dp"].get<double>() <= cf["stein"].get<double>());
    CHECK(cf["stein"].get<double>() <= cf["ml"].get<double>());
    CHECK(cf["ml"] == doctest::Approx(0.677207474079171277));

    const Run mc = cli({"--seed", "3", "risk", "--monte-carlo", "--n", "20", "--p", "3",
                        "--replicates", "200", "--methods", "sample,tsai", "--model", "spiked:9,4"});
    REQUIRE(mc.code == kExitOk);
    const Json m = Json::parse(mc.out)["results"]["monte_carlo"];
    CHECK(m.size() == 2);
    CHECK(m[0].contains("min_risk"));
    CHECK_FALSE(m[1].contains("min_risk"));

    const Run aborted = cli({"risk", "--monte-carlo", "--n", "10", "--p", "8", "--replicates", "100",
                             "--methods", "tsai"});
    CHECK(aborted.code == kExitNumeric);
    CHECK(aborted.err.find("replicates failed") != std::string::npos);
    CHECK(cli({"risk", "--n", "10", "--p", "3"}).code == kExitUsage);
    CHECK(cli({"risk", "--closed-form", "--n", "3", "--p", "10"}).code == kExitNumeric);
}

TEST_CASE("cli risk with an explicit population matrix") {
    TempDir dir;
    const std::string sigma = dir.write("s.csv", "2,0.5\n0.5,1\n");
    const Run r = cli({"risk", "--monte-carlo", "--n", "15", "--p", "2", "--replicates", "50",
                       "--methods", "stein", "--model", "explicit:" + sigma});
    CHECK(r.code == kExitOk);
    const std::string bad = dir.write("b.csv", "1,2\n2,1\n");
    CHECK(cli({"risk", "--monte-carlo", "--n", "15", "--p", "2", "--replicates", "50",
               "--model", "explicit:" + bad})
              .code == kExitNumeric);
}

TEST_CASE("cli simulate from flags and config files") {
    const Run r = cli({"--seed", "5", "simulate", "--experiment", "esd", "--n", "80", "--p", "20",
                       "--replicates", "3"});
    REQUIRE(r.code == kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(j["results"]["experiment"] == "esd_fit");
    CHECK(j["results"]["rows"].size() == 3);
    CHECK(j["seed"] == 5);

    TempDir dir;
    const std::string cfg = dir.write(
        "c.json",
        R"([{"experiment": "recovery", "model": "identity", "n": 40, "p": 4, "replicates": 3},
            {"experiment": "risk", "model": "ar1:0.4", "n": 30, "p": 3, "replicates": 5,
             "methods": ["sample", "dp_equivariant"], "seed": 17}])");
    const Run many = cli({"simulate", "--config", cfg});
    REQUIRE(many.code == kExitOk);
    const Json mj = Json::parse(many.out);
    CHECK(mj["results"]["reports"].size() == 2);
    CHECK(mj["config"]["runs"][1]["seed"] == 17);

    const Run csv = cli({"--format", "csv", "simulate", "--config", cfg});
    CHECK(csv.code == kExitOk);
    CHECK(csv.out.rfind("experiment,n,p,metric,mean,std_error,count\n", 0) == 0);

    CHECK(cli({"simulate", "--experiment", "esd", "--n", "100", "--p", "100"}).code == kExitNumeric);
    CHECK(cli({"simulate", "--experiment", "esd"}).code == kExitUsage);
    CHECK(cli({"simulate", "--config", dir.write("bad.json", "{oops")}).code == kExitNumeric);
}

TEST_CASE("cli power") {
    const Run r = cli({"power", "--n", "50", "--p", "3", "--delta-e1", "2", "--replicates", "200",
                       "--statistics"});
    REQUIRE(r.code == kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(j["results"]["statistics"].size() == 200);
    CHECK(j["results"]["noncentrality"] == doctest::Approx(4.0));
    CHECK(cli({"power", "--n", "50", "--p", "3", "--delta", "1,0", "--replicates", "10"}).code ==
          kExitNumeric);
    CHECK(cli({"power", "--n", "50", "--p", "3"}).code == kExitUsage);
}

TEST_CASE("cli usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    const Run r = cli({"mp", "--c", "0.5", "--bogus"});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({"--threads", "0", "mp", "--c", "0.5"}).code == kExitUsage);
    CHECK(cli({"estimate", "--input", "/nonexistent/file.csv"}).code == kExitNumeric);
}

TEST_CASE("cli writes to --output") {
    TempDir dir;
    const std::string out = (dir.path / "o.csv").string();
    const Run r = cli({"--output", out, "mp", "--c", "0.5", "--points", "4"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.empty());
    CHECK(read_csv(out, {',', true}).values.rows() == 4);
}

TEST_CASE("cli seed falls back to the environment") {
    ::setenv("COVSHRINK_SEED", "1234", 1);
    const Run env = cli({"power", "--n", "20", "--p", "2", "--delta-e1", "1", "--replicates", "30"});
    const Run flag = cli({"--seed", "1234", "power", "--n", "20", "--p", "2", "--delta-e1", "1",
                          "--replicates", "30"});
    ::unsetenv("COVSHRINK_SEED");
    const Run none = cli({"power", "--n", "20", "--p", "2", "--delta-e1", "1", "--replicates", "30"});
    REQUIRE(env.code == kExitOk);
    CHECK(Json::parse(env.out)["seed"] == 1234);
    CHECK(json_of(env) == json_of(flag));
    CHECK(Json::parse(none.out)["seed"] == 0);
}

TEST_CASE("cli output is identical across thread counts") {
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--experiment", "risk", "--n", "20", "--p", "4", "--replicates", "40"},
        {"risk", "--monte-carlo", "--closed-form", "--n", "12", "--p", "3", "--replicates", "60"},
        {"power", "--n", "30", "--p", "3", "--delta-e1", "1.5", "--replicates", "80",
         "--method", "decomposite", "--model", "spiked:9,4", "--statistics"}};
    for (const auto& args : commands) {
        std::vector<std::string> one = {"--seed", "21", "--threads", "1"};
        std::vector<std::string> four = {"--seed", "21", "--threads", "4"};
        one.insert(one.end(), args.begin(), args.end());
        four.insert(four.end(), args.begin(), args.end());
        const Run a = cli(one);
        const Run b = cli(four);
        REQUIRE(a.code == kExitOk);
        CHECK(json_of(a).dump() == json_of(b).dump());
    }
}
