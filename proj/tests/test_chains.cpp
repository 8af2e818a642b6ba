#include <doctest.h>

#include <random>

#include "ethlab/chains.hpp"
#include "ethlab/ensemble.hpp"
#include "ethlab/linalg.hpp"
#include "ethlab/stability.hpp"

using namespace ethlab;

namespace {

double maxabs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

Mat bounded(int n, std::uint64_t seed) {
    Mat g = sample_iid({2 * n, Dist::ComplexGaussian, seed});
    return g / opnorm(g);
}

ChainSpec random_spec(int n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-0.6, 0.6), im(0.05, 0.8);
    std::bernoulli_distribution up(0.5);
    ChainSpec s;
    for (int i = 0; i < k; ++i) s.ws.emplace_back(re(rng), up(rng) ? im(rng) : -im(rng));
    for (int i = 0; i + 1 < k; ++i) s.Bs.push_back(bounded(n, seed * 10 + std::uint64_t(i)) + 0.5 * e_minus(n));
    return s;
}

}  // namespace

TEST_CASE("length-one chain is the MDE solution") {
    const Deformation def = Deformation::random_diagonal(6, 1.0, 1);
    ChainSpec s;
    s.ws = {cd(0.1, 0.3)};
    CHECK(maxabs(chain_M(def, s) - solve_mde(def, s.ws[0]).M) < 1e-14);
}

TEST_CASE("identity insertion obeys the resolvent identity") {
    const Deformation def = Deformation::shift(6, cd(0.3, 0.1));
    for (auto [w1, w2] : {std::pair{cd(0.2, 0.3), cd(-0.1, 0.2)}, std::pair{cd(0.2, 0.3), cd(0.4, -0.1)}}) {
        ChainSpec s;
        s.ws = {w1, w2};
        s.Bs = {e_plus(6)};
        const Mat expect = (solve_mde(def, w1).M - solve_mde(def, w2).M) / (w1 - w2);
        CHECK(maxabs(chain_M(def, s) - expect) < 1e-10);
    }
}

TEST_CASE("two-point chain against the explicit stability inverse") {
    const Deformation def = Deformation::random_diagonal(6, 1.0, 3);
    const cd w1(0.15, 0.2), w2(-0.05, -0.25);
    const Mat M1 = solve_mde(def, w1).M, M2 = solve_mde(def, w2).M;
    const Mat B = bounded(6, 17);
    ChainSpec s;
    s.ws = {w1, w2};
    s.Bs = {B};
    CHECK(maxabs(chain_M(def, s) - stability_inverse(M1 * B * M2, M1, M2)) < 1e-10);
}

TEST_CASE("memoised and plain evaluation agree; recursion variants agree") {
    const Deformation def = Deformation::random_diagonal(5, 1.0, 8);
    for (int k = 2; k <= 4; ++k) {
        const ChainSpec s = random_spec(5, k, 100 + std::uint64_t(k));
        const Mat ref = chain_M(def, s, false);
        const double scale = std::max(1.0, maxabs(ref));
        CHECK(maxabs(chain_M(def, s, true) - ref) / scale < 1e-12);
        for (int j = 1; j <= k; ++j)
            for (Expansion which : {Expansion::Right, Expansion::Left})
                CHECK(maxabs(chain_M_variant(def, s, j, which) - ref) / scale < 1e-8);
    }
}

TEST_CASE("sub-chains of the evaluator") {
    const Deformation def = Deformation::zero(4);
    const ChainSpec s = random_spec(4, 4, 7);
    ChainEvaluator ev(def, s);
    ChainSpec tail;
    tail.ws.assign(s.ws.begin() + 1, s.ws.end());
    tail.Bs.assign(s.Bs.begin() + 1, s.Bs.end());
    CHECK(maxabs(ev.sub(1, 3) - chain_M(def, tail)) < 1e-12);
    CHECK(maxabs(ev.sub(2, 2) - solve_mde(def, s.ws[2]).M) < 1e-14);
}

TEST_CASE("chain validation") {
    const Deformation def = Deformation::zero(4);
    ChainSpec s;
    CHECK_THROWS_AS(s.validate(), Error);
    s = random_spec(4, 7, 1);
    CHECK_THROWS_AS(s.validate(), Error);
    s = random_spec(4, 3, 2);
    s.ws[1] = cd(0.2, 0.0);
    CHECK_THROWS_AS(chain_M(def, s), Error);
    s = random_spec(4, 3, 3);
    s.Bs.pop_back();
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("bounds report for regularised chains") {
    const Deformation def = Deformation::random_diagonal(8, 1.0, 5);
    const std::vector<Mat> as = {bounded(8, 1) + e_minus(8), bounded(8, 2) + e_plus(8)};
    for (double eta : {0.5, 0.1, 0.03}) {
        const std::vector<cd> ws = {cd(0.05, eta), cd(0.05, -eta), cd(0.05, eta)};
        const ChainBoundsReport r = chain_bounds_report(def, ws, as, 0.1);
        CHECK(r.k == 2);
        CHECK(r.eta == doctest::Approx(eta));
        CHECK(r.within(kChainCheck));
    }
}
