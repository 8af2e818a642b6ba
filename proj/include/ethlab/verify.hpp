#pragma once

#include <deque>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ethlab/config.hpp"
#include "ethlab/density.hpp"
#include "ethlab/ensemble.hpp"

namespace ethlab {

// One statistic at one grid point, one value per trial.
struct GridStat {
    int n = 0;
    double eta = 0.0;
    double e = 0.0;
    std::string quantity;
    std::vector<double> values;
    std::vector<int> trial_ids;  // trial index of each value
    double bound = 0.0;         // per-trial bound; 0 when not applicable
    double fraction = 1.0;      // fraction of trials within bound
    double required = 0.95;     // fraction needed
    bool pass = true;
};

// A named assertion: value must lie in [lo, hi].
struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
    bool enforced = true;  // informational checks are reported but do not fail the scan
    std::string note;
};

struct ScanReport {
    std::string experiment;
    std::string config_hash;
    // deques keep references from stat()/check() valid while entries are added
    std::deque<GridStat> grid;
    std::deque<Check> checks;
    nlohmann::json extra = nlohmann::json::object();
    int trials = 0;
    int excluded_samples = 0;
    int total_samples = 0;
    bool pass = false;
    // Auxiliary text outputs written next to the report (file name, contents).
    std::vector<std::pair<std::string, std::string>> files;

    // Adds a range check; enforced checks feed the pass flag.
    Check& check(const std::string& name, double value, double lo, double hi, bool enforced = true,
                 const std::string& note = "");
    const Check* find(const std::string& name) const;
    GridStat& stat(int n, double eta, double e, const std::string& q);
    // Evaluates per-point bounds, the half-sample consistency and the pass flag.
    void finalize();
};

void to_json(nlohmann::json& j, const ScanReport& r);
void write_csv(const ScanReport& r, const std::string& path);

// Per-trial sample streams shared by the experiments.
SampleConfig trial_config(const ExperimentConfig& cfg, int n, int trial);

// Indices i in [N] whose quantile lies in B_kappa at distance >= kappa/4 from
// its boundary.
std::vector<int> bulk_indices(const QuantileTable& q, const std::vector<Interval>& bulk, double kappa);

ScanReport run_solve(const ExperimentConfig& cfg);
ScanReport run_density(const ExperimentConfig& cfg);
ScanReport run_quantiles(const ExperimentConfig& cfg);
ScanReport run_single_law(const ExperimentConfig& cfg);
ScanReport run_regular_single_law(const ExperimentConfig& cfg);
ScanReport run_two_resolvent(const ExperimentConfig& cfg);
ScanReport run_eth(const ExperimentConfig& cfg);
ScanReport run_singvec(const ExperimentConfig& cfg);
ScanReport run_overlap(const ExperimentConfig& cfg);
ScanReport run_rigidity(const ExperimentConfig& cfg);
ScanReport run_variance_decomposition(const ExperimentConfig& cfg);
ScanReport run_identity_suite(const ExperimentConfig& cfg);
ScanReport run_ou_flow(const ExperimentConfig& cfg);
ScanReport run_chain_oracle(const ExperimentConfig& cfg);
// Recursion equivalence over randomised chain specs.
ScanReport run_recursion_suite(const ExperimentConfig& cfg);

ScanReport run_experiment(const ExperimentConfig& cfg);

}  // namespace ethlab
