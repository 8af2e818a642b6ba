#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ethlab {

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "solve",    "density", "quantiles", "single-law", "regular-law", "two-resolvent", "eth",
        "singvec",  "overlap", "rigidity",  "variance",   "identities",  "ou-flow",       "chain-oracle"};
    return names;
}

struct ExperimentConfig {
    std::string experiment;
    std::string deformation = "zero";
    std::vector<int> n_list = {64, 128, 256, 512};
    std::vector<double> eta_grid;  // empty: 8 geometric points from 1 to N^{-0.8}
    std::vector<double> energies = {0.0};
    double kappa = 0.01;
    std::optional<double> delta;  // default min(0.1, kappa/10)
    std::string dist = "complex-gaussian";
    int trials = 50;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::string out_dir = "out";
    nlohmann::json options = nlohmann::json::object();  // experiment-specific knobs

    double delta_value() const;
    std::vector<double> etas_for(int n) const;
    // Field-level validation; throws ConfigError naming the field.
    void validate() const;
    // Hash of everything that affects results (excludes out_dir, workers).
    std::string hash() const;

    template <typename T>
    T option(const std::string& key, T fallback) const {
        return options.contains(key) ? options.at(key).get<T>() : fallback;
    }

    bool operator==(const ExperimentConfig& o) const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& c);

}  // namespace ethlab
