#include "ethlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ethlab/stability.hpp"
#include "ethlab/types.hpp"

namespace ethlab {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, field + ": " + why);
}

const std::vector<std::string> kKnownKeys = {"experiment", "deformation", "N_list",      "eta_grid",
                                             "energies",   "kappa",       "delta",       "dist",
                                             "trials",     "master_seed", "workers",     "out_dir",
                                             "options"};

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        bad(key, std::string("wrong type (") + e.what() + ")");
    }
}

}  // namespace

double ExperimentConfig::delta_value() const { return delta ? *delta : default_delta(kappa); }

std::vector<double> ExperimentConfig::etas_for(int n) const {
    if (!eta_grid.empty()) return eta_grid;
    std::vector<double> out;
    const double lo = std::pow(double(n), -0.8);
    for (int k = 0; k < 8; ++k) out.push_back(std::pow(lo, k / 7.0));
    return out;
}

void ExperimentConfig::validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        bad("experiment", "unknown experiment '" + experiment + "'");
    if (deformation.empty()) bad("deformation", "empty deformation spec");
    if (n_list.empty()) bad("N_list", "must not be empty");
    for (int n : n_list)
        if (n < 2) bad("N_list", "dimensions must be at least 2");
    for (double e : eta_grid)
        if (!(e > 0)) bad("eta_grid", "entries must be positive");
    if (!(kappa > 0 && kappa < 1)) bad("kappa", "must lie in (0,1)");
    if (delta && !(*delta > 0)) bad("delta", "must be positive");
    if (dist != "complex-gaussian" && dist != "uniform-phase") bad("dist", "unknown distribution '" + dist + "'");
    if (trials < 1) bad("trials", "must be positive");
    if (workers < 1) bad("workers", "must be positive");
    if (out_dir.empty()) bad("out_dir", "must not be empty");
    if (!options.is_object()) bad("options", "must be an object");
}

std::string ExperimentConfig::hash() const {
    nlohmann::json j = *this;
    j.erase("out_dir");
    j.erase("workers");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return nlohmann::json(*this) == nlohmann::json(o);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = {{"experiment", c.experiment}, {"deformation", c.deformation}, {"N_list", c.n_list},
         {"eta_grid", c.eta_grid},     {"energies", c.energies},       {"kappa", c.kappa},
         {"dist", c.dist},             {"trials", c.trials},           {"master_seed", c.master_seed},
         {"workers", c.workers},       {"out_dir", c.out_dir},         {"options", c.options}};
    if (c.delta) j["delta"] = *c.delta;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    if (!j.is_object()) bad("config", "top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), it.key()) == kKnownKeys.end())
            bad(it.key(), "unknown field");
    if (!j.contains("experiment")) bad("experiment", "missing");
    read(j, "experiment", c.experiment);
    read(j, "deformation", c.deformation);
    read(j, "N_list", c.n_list);
    read(j, "eta_grid", c.eta_grid);
    read(j, "energies", c.energies);
    read(j, "kappa", c.kappa);
    if (j.contains("delta") && !j.at("delta").is_null()) {
        double d = 0;
        read(j, "delta", d);
        c.delta = d;
    }
    read(j, "dist", c.dist);
    read(j, "trials", c.trials);
    read(j, "master_seed", c.master_seed);
    read(j, "workers", c.workers);
    read(j, "out_dir", c.out_dir);
    read(j, "options", c.options);
    c.validate();
}

ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        bad("config", std::string("parse error: ") + e.what());
    }
    return j.get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("config", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) { return nlohmann::json(c).dump(2); }

}  // namespace ethlab
