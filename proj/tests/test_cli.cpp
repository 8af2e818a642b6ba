#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

std::string binary() {
    const char* b = std::getenv("ETHLAB_BIN");
    REQUIRE_MESSAGE(b != nullptr, "ETHLAB_BIN is not set");
    return b;
}

Result run(const std::string& args) {
    Result r;
    const std::string cmd = binary() + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, k);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("ethlab_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
    const fs::path p = dir / (j["experiment"].get<std::string>() + ".json");
    std::ofstream(p) << j.dump(2);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

fs::path only_report_dir(const fs::path& out) {
    for (const auto& e : fs::directory_iterator(out))
        if (e.is_directory()) return e.path();
    FAIL("no report directory under " << out);
    return {};
}

}  // namespace

TEST_CASE("density run writes the semicircle value at the origin") {
    const fs::path d = scratch("density");
    const fs::path cfg = write_config(d, {{"experiment", "density"}, {"N_list", {64}}, {"out_dir", (d / "out").string()}});
    const Result r = run("run " + cfg.string());
    INFO(r.out);
    REQUIRE(r.code == 0);
    const fs::path rep = only_report_dir(d / "out");
    for (const char* f : {"report.json", "config.json", "scan.csv", "density.csv"}) CHECK(fs::exists(rep / f));

    std::ifstream csv(rep / "density.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "e,rho");
    double best_e = 1e9, best_rho = 0;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        const double e = std::stod(line.substr(0, comma)), rho = std::stod(line.substr(comma + 1));
        if (std::abs(e) < std::abs(best_e)) best_e = e, best_rho = rho;
    }
    CHECK(std::abs(best_e) < 1e-2);
    // rho(e) = sqrt(4 - e^2) / (2 pi) is flat to second order at 0
    CHECK(best_rho == doctest::Approx(std::sqrt(4 - best_e * best_e) / (2 * M_PI)).epsilon(1e-5));
    CHECK(std::abs(best_rho - 0.31831) < 1e-5 + best_e * best_e);

    const nlohmann::json first = read_json(rep / "report.json");
    CHECK(first["pass"] == true);
    CHECK(run("run " + cfg.string()).code == 0);
    nlohmann::json second = read_json(rep / "report.json");
    nlohmann::json a = first;
    a.erase("timestamp");
    second.erase("timestamp");
    CHECK(a == second);
}

TEST_CASE("worker override leaves results unchanged") {
    const fs::path d = scratch("workers");
    const fs::path cfg = write_config(d, {{"experiment", "single-law"},
                                          {"N_list", {24}},
                                          {"eta_grid", {0.5}},
                                          {"trials", 20},
                                          {"out_dir", (d / "out").string()}});
    REQUIRE(run("run " + cfg.string()).code != 1);
    nlohmann::json a = read_json(only_report_dir(d / "out") / "report.json");
    setenv("ETHLAB_WORKERS", "2", 1);
    const Result r = run("run " + cfg.string());
    unsetenv("ETHLAB_WORKERS");
    REQUIRE(r.code != 1);
    nlohmann::json b = read_json(only_report_dir(d / "out") / "report.json");
    a.erase("timestamp");
    b.erase("timestamp");
    CHECK(a == b);
}

TEST_CASE("configuration errors exit with 1") {
    const fs::path d = scratch("errors");
    const fs::path cfg = write_config(d, {{"experiment", "banana"}});
    const Result r = run("run " + cfg.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("experiment") != std::string::npos);

    const Result missing = run("run " + (d / "absent.json").string());
    CHECK(missing.code == 1);
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
}

TEST_CASE("report subcommand") {
    const fs::path d = scratch("report");
    const Result empty = run("report " + d.string());
    CHECK(empty.code == 1);
    CHECK(empty.out.find("NoReports") != std::string::npos);

    fs::create_directories(d / "good");
    fs::create_directories(d / "bad");
    std::ofstream(d / "good" / "report.json") << R"({"experiment": "density", "pass": true})";
    const Result ok = run("report " + d.string());
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS") != std::string::npos);

    std::ofstream(d / "bad" / "report.json")
        << R"({"experiment": "variance", "pass": false,
              "extra": {"fits": {"minus": {"slope": null, "band": [-1.3, -0.7]}}}})";
    const Result mixed = run("report " + d.string());
    CHECK(mixed.code == 2);
    CHECK(mixed.out.find("FAIL") != std::string::npos);
    CHECK(mixed.out.find("n/a") != std::string::npos);
}

TEST_CASE("solve subcommand") {
    const Result r = run("solve --w 0,1 -N 8");
    REQUIRE(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["m"][0].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(j["m"][1].get<double>() == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-12));
    CHECK(j["residual"].get<double>() < 1e-12);

    const Result shifted = run("solve --deformation shift:0.5,0 --w 0.3,0.1 -N 4");
    CHECK(shifted.code == 0);
    CHECK(run("solve --w 0.3,0 -N 4").code == 1);
    CHECK(run("solve --w abc -N 4").code == 1);
    CHECK(run("solve --deformation wobble --w 0,1").code == 1);
}
