#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fredholm/config.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("fredholm_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string write(const std::string& name, const json& doc) const {
        const fs::path p = path / name;
        std::ofstream(p) << doc.dump();
        return p.string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
    int status;
    std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fredholm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = fredholm::run_cli(int(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> csv_phi(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::vector<double> phi;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            REQUIRE(line == "t,phi");
            header_seen = true;
            continue;
        }
        phi.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    return phi;
}

json capped11() {
    return {{"kernel", {{"type", "capped_linear"}, {"cap", 1}}},
            {"gamma", 0.01},
            {"horizon", 11},
            {"method", "capped_linear"},
            {"samples", 10001}};
}
json trig_neg() {
    return {{"kernel", {{"type", "trigonometric"}, {"rho", 0.5}}}, {"gamma", 0.001}, {"horizon", 1}, {"method", "trig"}};
}
json power4() {
    return {{"kernel", {{"type", "power_capped"}, {"rho", 10}, {"p", 4}}},
            {"gamma", 0.001},
            {"horizon", 1},
            {"method", "discrete"},
            {"cells", 2048}};
}
json exp_one() {
    return {{"kernel", {{"type", "exponential_sum"}, {"a", {1.0}}, {"b", {1.0}}}}, {"gamma", 1}, {"horizon", 1}};
}

}  // namespace

TEST_CASE("parse_config rejects malformed configs") {
    using fredholm::parse_config;
    CHECK_THROWS_AS(parse_config(json::array()), fredholm::InvalidArgument);
    json c = exp_one();
    c["colour"] = "red";
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = exp_one();
    c["gamma"] = -1;
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = exp_one();
    c["method"] = "trig";
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = capped11();
    c["horizon"] = 10.5;
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = capped11();
    c["kernel"]["cap"] = 2;
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = exp_one();
    c["checks"] = {"constraint", "vibes"};
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
    c = exp_one();
    c["kernel"]["type"] = "gaussian";
    CHECK_THROWS_AS(parse_config(c), fredholm::InvalidArgument);
}

TEST_CASE("auto picks the closed form when one exists") {
    using fredholm::Method;
    using fredholm::parse_config;
    using fredholm::resolve_method;
    CHECK(resolve_method(parse_config(exp_one())) == Method::ExpClosedForm);
    json c = capped11();
    c.erase("method");
    CHECK(resolve_method(parse_config(c)) == Method::CappedLinear);
    c["horizon"] = 10.5;
    CHECK(resolve_method(parse_config(c)) == Method::Discrete);
    c = trig_neg();
    c.erase("method");
    CHECK(resolve_method(parse_config(c)) == Method::Trig);
    c = power4();
    c.erase("method");
    CHECK(resolve_method(parse_config(c)) == Method::Discrete);
}

TEST_CASE("capped-linear T = 11 config gives a positive nonconvex curve") {
    TempDir tmp;
    const auto r = cli({"solve", "--config", tmp.write("fig1.json", capped11()), "--out", tmp.file("fig1.csv")});
    REQUIRE(r.status == 0);
    const auto phi = csv_phi(tmp.file("fig1.csv"));
    REQUIRE(phi.size() == 10001);
    double lo = phi[0];
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        lo = std::min(lo, phi[i]);
        if (i + 2 < phi.size()) {
            const double d2 = phi[i + 2] - 2.0 * phi[i + 1] + phi[i];
            pos = pos || d2 > 1e-9;
            neg = neg || d2 < -1e-9;
        }
    }
    CHECK(lo >= 0.0);
    CHECK(pos);
    CHECK(neg);
    const json summary = json::parse(slurp(tmp.file("fig1.summary.json")));
    CHECK(summary["monotonicity"]["verdicts"]["convex"] == false);
    CHECK(summary["monotonicity"]["verdicts"]["nonnegative"] == true);
    CHECK(json::parse(r.out) == summary);
}

TEST_CASE("cos(t/2) config has negative values") {
    TempDir tmp;
    const auto r = cli({"solve", "--config", tmp.write("fig2.json", trig_neg()), "--out", tmp.file("fig2.csv")});
    REQUIRE(r.status == 0);
    const auto phi = csv_phi(tmp.file("fig2.csv"));
    CHECK(*std::min_element(phi.begin(), phi.end()) < 0.0);
}

TEST_CASE("power-capped m = 2048 config reports a nonconvex verdict") {
    TempDir tmp;
    const auto r = cli({"solve", "--config", tmp.write("fig3.json", power4()), "--out", tmp.file("fig3.csv")});
    REQUIRE(r.status == 0);
    const json summary = json::parse(slurp(tmp.file("fig3.summary.json")));
    CHECK(summary["monotonicity"]["verdicts"]["convex"] == false);
    CHECK(summary["cells"] == 2048);
    CHECK(csv_phi(tmp.file("fig3.csv")).size() == 2048);
}

TEST_CASE("json output carries the curve") {
    TempDir tmp;
    const auto r = cli({"solve", "--config", tmp.write("e.json", exp_one()), "--out", tmp.file("e.json.out"), "--format",
                        "json"});
    REQUIRE(r.status == 0);
    const json doc = json::parse(slurp(tmp.file("e.json.out")));
    CHECK(doc["t"].size() == doc["phi"].size());
    CHECK(doc["t"].size() == 1001);
    CHECK(doc.contains("sigma"));
}

TEST_CASE("compare: self, exp n=1 and capped-linear against discrete") {
    TempDir tmp;
    const std::string e = tmp.write("e.json", exp_one());
    auto r = cli({"compare", "--config", e, e});
    REQUIRE(r.status == 0);
    json cmp = json::parse(r.out);
    CHECK(cmp["max_abs"].get<double>() == 0.0);
    CHECK(cmp["l2"].get<double>() == 0.0);
    CHECK(cmp["sigma_rel_diff"].get<double>() == 0.0);

    json d = exp_one();
    d["method"] = "discrete";
    d["cells"] = 1024;
    r = cli({"compare", "--config", e, tmp.write("d.json", d)});
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out)["max_abs"].get<double>() <= 5e-3);

    json c = {{"kernel", {{"type", "capped_linear"}}}, {"gamma", 0.1}, {"horizon", 3}, {"method", "capped_linear"}};
    json cd = c;
    cd["method"] = "discrete";
    cd["cells"] = 1536;
    r = cli({"compare", "--config", tmp.write("c.json", c), tmp.write("cd.json", cd)});
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out)["max_abs"].get<double>() <= 5e-3);

    json other = exp_one();
    other["horizon"] = 2;
    r = cli({"compare", "--config", e, tmp.write("o.json", other)});
    CHECK(r.status == 2);
    CHECK(json::parse(r.err).contains("error"));
}

TEST_CASE("sweep and verify subcommands") {
    TempDir tmp;
    json s = {{"kernel", {{"type", "exponential_sum"}, {"a", {1.0, 2.0}}, {"b", {1.0, 4.0}}}},
              {"gamma", 1},
              {"horizon", 1},
              {"cells", 128},
              {"gammas", {1.0, 0.1, 0.01}}};
    auto r = cli({"sweep", "--config", tmp.write("s.json", s)});
    REQUIRE(r.status == 0);
    json out = json::parse(r.out);
    REQUIRE(out["entries"].size() == 3);
    CHECK(out["endpoint_mass_nondecreasing"] == true);

    s["gammas"] = {0.1, 1.0};
    r = cli({"sweep", "--config", tmp.write("s2.json", s)});
    CHECK(r.status == 2);

    r = cli({"verify", "--config", tmp.write("e.json", exp_one())});
    REQUIRE(r.status == 0);
    out = json::parse(r.out);
    CHECK(out["certificates"].size() == 6);
    CHECK(out["ok"] == true);

    r = cli({"verify", "--config", tmp.write("f.json", trig_neg())});
    CHECK(r.status == 2);
}

TEST_CASE("batch solve writes independent outputs") {
    TempDir tmp;
    json a = exp_one();
    a["output"] = {{"path", tmp.file("a.csv")}};
    json b = trig_neg();
    b["output"] = {{"path", tmp.file("b.csv")}};
    const auto r = cli({"solve", "--config", tmp.write("batch.json", json::array({a, b}))});
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out)["results"].size() == 2);
    CHECK(fs::exists(tmp.file("a.csv")));
    CHECK(fs::exists(tmp.file("b.summary.json")));
}

TEST_CASE("outputs are byte identical across runs") {
    TempDir tmp;
    const std::string cfg = tmp.write("fig3.json", power4());
    REQUIRE(cli({"solve", "--config", cfg, "--cells", "2048", "--out", tmp.file("x.csv")}).status == 0);
    REQUIRE(cli({"solve", "--config", cfg, "--cells", "2048", "--out", tmp.file("y.csv")}).status == 0);
    CHECK(slurp(tmp.file("x.csv")) == slurp(tmp.file("y.csv")));
    CHECK(slurp(tmp.file("x.summary.json")) == slurp(tmp.file("y.summary.json")));
    CHECK(slurp(tmp.file("x.csv")).find("# sigma") != std::string::npos);
}

TEST_CASE("failing checks and errors set the exit status") {
    TempDir tmp;
    json c = trig_neg();
    c["checks"] = {"nonnegative"};
    auto r = cli({"solve", "--config", tmp.write("neg.json", c), "--out", tmp.file("neg.csv")});
    CHECK(r.status == 1);

    r = cli({"solve", "--config", tmp.file("missing.json")});
    CHECK(r.status == 2);
    json e = json::parse(r.err);
    CHECK(e["error"].is_string());
    CHECK(e["detail"]["code"] == "invalid_argument");

    json pole = trig_neg();
    pole["kernel"]["rho"] = 3.14159265358979323846;
    r = cli({"solve", "--config", tmp.write("pole.json", pole), "--out", tmp.file("pole.csv")});
    CHECK(r.status == 2);
    CHECK(json::parse(r.err)["detail"]["code"] == "trig_pole");

    json box = {{"kernel", {{"type", "tabulated"}, {"t", {0.0, 0.5, 0.5000001, 10.0}}, {"g", {1.0, 1.0, 0.0, 0.0}}}},
                {"gamma", 1e-6},
                {"horizon", 4},
                {"cells", 64}};
    r = cli({"solve", "--config", tmp.write("box.json", box), "--out", tmp.file("box.csv")});
    CHECK(r.status == 2);

    r = cli({"solve"});
    CHECK(r.status == 2);
    CHECK(json::parse(r.err)["detail"]["code"] == "usage");
}
