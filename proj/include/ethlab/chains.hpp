#pragma once

#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "ethlab/mde.hpp"

namespace ethlab {

// M(w_1, B_1, ..., B_{k-1}, w_k).
struct ChainSpec {
    std::vector<cd> ws;
    std::vector<Mat> Bs;
    std::vector<bool> regular_flags;  // optional, one per B

    int length() const { return int(ws.size()); }
    void validate() const;
};

// Evaluates sub-chains M(w_l, ..., w_r) with a per-object cache.
class ChainEvaluator {
public:
    ChainEvaluator(const Deformation& def, const ChainSpec& spec, bool memoize = true);
    // 0-based inclusive indices.
    Mat sub(int l, int r);
    const Mat& single(int i);

private:
    Mat compute(int l, int r);
    Deformation def_;
    const ChainSpec& spec_;
    bool memo_;
    std::vector<Mat> singles_;
    std::map<std::pair<int, int>, Mat> cache_;
};

Mat chain_M(const Deformation& def, const ChainSpec& spec, bool memoize = true);

enum class Expansion { Right, Left };
// Alternative recursive Dyson equation expanding the j-th resolvent (1-based).
Mat chain_M_variant(const Deformation& def, const ChainSpec& spec, int j, Expansion which);

struct ChainBoundsReport {
    int k = 0;
    double eta = 0.0;
    double norm = 0.0;         // ||M(w_1, A_1, ..., A_k, w_{k+1})||
    double trace = 0.0;        // |<M(w_1, A_1, ..., w_k) A_k>|
    double norm_bound = 0.0;   // eta^{-floor(k/2)}
    double trace_bound = 0.0;  // max(eta^{-(floor(k/2)-1)}, 1)
    double norm_ratio = 0.0;
    double trace_ratio = 0.0;
    bool within(double c) const { return norm_ratio <= c && trace_ratio <= c; }
};
inline constexpr double kChainCheck = 50.0;

// ws has k+1 entries, as has k raw observables; each is regularised against
// its neighbouring pair before the bounds are evaluated.
ChainBoundsReport chain_bounds_report(const Deformation& def, const std::vector<cd>& ws,
                                      const std::vector<Mat>& as, double delta);

void to_json(nlohmann::json& j, const ChainBoundsReport& r);

}  // namespace ethlab
