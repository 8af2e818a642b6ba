#include "ethlab/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ethlab/linalg.hpp"
#include "ethlab/mde.hpp"

namespace ethlab {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << text;
}

cd parse_complex(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "w: expected <re>,<im>, got '" + s + "'");
    }
}

}  // namespace

std::string report_dir_for(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / (cfg.experiment + "-" + cfg.hash())).string();
}

std::string write_report(const ExperimentConfig& cfg, const ScanReport& r) {
    const fs::path dir = report_dir_for(cfg);
    fs::create_directories(dir);
    nlohmann::json j = r;
    j["timestamp"] = utc_now();
    write_text(dir / "report.json", j.dump(2) + "\n");
    write_text(dir / "config.json", dump_config(cfg) + "\n");
    write_csv(r, (dir / "scan.csv").string());
    for (const auto& [name, text] : r.files) write_text(dir / name, text);
    return dir.string();
}

int run_config_file(const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(path);
        if (const char* env = std::getenv("ETHLAB_WORKERS")) {
            try {
                cfg.workers = std::stoi(env);
            } catch (const std::exception&) {
                throw Error(ErrorCode::ConfigError, "ETHLAB_WORKERS: not an integer");
            }
            cfg.validate();
        }
        const ScanReport r = run_experiment(cfg);
        const std::string dir = write_report(cfg, r);
        out << cfg.experiment << ' ' << (r.pass ? "PASS" : "FAIL") << ' ' << dir << '\n';
        for (const auto& c : r.checks)
            if (c.enforced && !c.pass)
                out << "  failed: " << c.name << " = " << c.value << " not in [" << c.lo << ", " << c.hi << "]\n";
        for (const auto& g : r.grid)
            if (!g.pass)
                out << "  failed: " << g.quantity << " N=" << g.n << " eta=" << g.eta << " e=" << g.e
                    << " fraction " << g.fraction << " < " << g.required << '\n';
        return r.pass ? kExitPass : kExitContract;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int report_directory(const std::string& dir, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> found;
    std::error_code ec;
    if (fs::is_directory(dir, ec))
        for (const auto& entry : fs::recursive_directory_iterator(dir, ec))
            if (entry.is_regular_file() && entry.path().filename() == "report.json") found.push_back(entry.path());
    if (found.empty()) {
        err << "error: " << Error(ErrorCode::NoReports, "no report.json under " + dir).what() << '\n';
        return kExitError;
    }
    std::sort(found.begin(), found.end());
    bool all = true;
    out << std::left << std::setw(16) << "experiment" << std::setw(6) << "pass" << "fits (value vs band)\n";
    for (const auto& p : found) {
        nlohmann::json j;
        try {
            std::ifstream in(p);
            j = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
            err << "error: " << p.string() << ": " << e.what() << '\n';
            return kExitError;
        }
        const bool pass = j.value("pass", false);
        all = all && pass;
        std::ostringstream fits;
        if (j.contains("extra") && j["extra"].contains("fits"))
            for (const auto& [name, f] : j["extra"]["fits"].items()) {
                fits << name << ' ';
                if (f["slope"].is_null())
                    fits << "n/a";
                else
                    fits << std::setprecision(3) << f["slope"].get<double>();
                fits << " [" << f["band"][0].get<double>() << ", " << f["band"][1].get<double>() << "]  ";
            }
        out << std::left << std::setw(16) << j.value("experiment", "?") << std::setw(6) << (pass ? "PASS" : "FAIL")
            << fits.str() << '\n';
    }
    return all ? kExitPass : kExitContract;
}

int solve_point(const std::string& deformation, const std::string& w, int n, std::ostream& out,
                std::ostream& err) {
    try {
        const Deformation def = Deformation::from_spec(deformation, n);
        const cd z = parse_complex(w);
        const MdeSolution s = solve_mde(def, z);
        nlohmann::json j = {{"deformation", deformation},
                            {"N", n},
                            {"w", {z.real(), z.imag()}},
                            {"m", {s.m.real(), s.m.imag()}},
                            {"residual", s.residual},
                            {"norm_M", opnorm(s.M)},
                            {"im_m_over_pi", s.m.imag() / 3.141592653589793}};
        out << j.dump(2) << '\n';
        return kExitPass;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace ethlab
