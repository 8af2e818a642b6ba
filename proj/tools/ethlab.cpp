#include <iostream>

#include <CLI11.hpp>

#include "ethlab/linalg.hpp"
#include "ethlab/runner.hpp"

int main(int argc, char** argv) {
    ethlab::blas_guard(argv);
    CLI::App app{"ethlab: deformed i.i.d. matrix experiments"};
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config, "config path")->required();

    std::string dir;
    auto* report = app.add_subcommand("report", "summarise reports below a directory");
    report->add_option("dir", dir, "output directory")->required();

    std::string deformation = "zero", w;
    int n = 64;
    auto* solve = app.add_subcommand("solve", "solve the matrix Dyson equation at one point");
    solve->add_option("--deformation", deformation, "deformation spec");
    solve->add_option("--w", w, "spectral parameter <re>,<im>")->required();
    solve->add_option("-N,--n", n, "dimension")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : ethlab::kExitError;
    }
    if (*run) return ethlab::run_config_file(config, std::cout, std::cerr);
    if (*report) return ethlab::report_directory(dir, std::cout, std::cerr);
    return ethlab::solve_point(deformation, w, n, std::cout, std::cerr);
}
