#include <doctest.h>

#include <algorithm>

#include "ethlab/ensemble.hpp"
#include "ethlab/linalg.hpp"
#include "ethlab/stability.hpp"

using namespace ethlab;

namespace {

double maxabs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

Mat observable(int n, std::uint64_t seed) {
    Mat g = sample_iid({2 * n, Dist::ComplexGaussian, seed});
    g /= opnorm(g);
    return g + 0.6 * e_plus(n) - 0.3 * e_minus(n);
}

}  // namespace

TEST_CASE("eigenvalues at w1 = i, w2 = -i for the zero deformation") {
    const Deformation def = Deformation::zero(6);
    const StabilityEigs e = stability_eigs(solve_mde(def, cd(0, 1)), solve_mde(def, cd(0, -1)));
    // |m|^2 = (3 - sqrt 5) / 2; beta_+ = 1 - |m|^2, beta_- = 1 + |m|^2
    const double m2 = (3 - std::sqrt(5.0)) / 2;
    CHECK(std::abs(e.plus.beta - (1 - m2)) < 1e-12);
    CHECK(std::abs(e.minus.beta - (1 + m2)) < 1e-12);
    CHECK(e.critical_sign == 1);
}

TEST_CASE("eigentriples against direct application and brute force") {
    const Deformation def = Deformation::random_diagonal(8, 1.0, 2);
    for (auto [w1, w2] : {std::pair{cd(0.2, 0.1), cd(-0.1, -0.3)}, std::pair{cd(0.3, 0.2), cd(0.1, 0.4)}}) {
        const MdeSolution s1 = solve_mde(def, w1), s2 = solve_mde(def, w2);
        const StabilityEigs e = stability_eigs(s1, s2);
        for (int s : {1, -1}) {
            const Eigentriple& t = e.get(s);
            CHECK(maxabs(stability_apply(s1.M, s2.M, t.R) - t.beta * t.R) < 1e-10);
        }
        const auto bf = stability_eigs_bruteforce(s1.M, s2.M);
        for (int s : {1, -1}) {
            double best = 1e300;
            for (cd v : bf) best = std::min(best, std::abs(v - e.get(s).beta));
            CHECK(best < 1e-9);
        }
        CHECK(e.critical_sign == (w1.imag() * w2.imag() < 0 ? 1 : -1));
    }
}

TEST_CASE("inverse operators") {
    const Deformation def = Deformation::shift(6, cd(0.4, 0.2));
    const Mat M1 = solve_mde(def, cd(0.1, 0.2)).M, M2 = solve_mde(def, cd(-0.2, -0.1)).M;
    const Mat B = observable(6, 9);
    const Mat X = x_op(B, M1, M2);
    CHECK(maxabs(X - s_op(M1 * X * M2) - B) < 1e-10);
    const Mat T = stability_inverse(B, M1, M2);
    CHECK(maxabs(stability_apply(M1, M2, T) - B) < 1e-10);
}

TEST_CASE("bump profile") {
    const double d = 0.2;
    CHECK(bump(0.0, d) == 1.0);
    CHECK(bump(0.1, d) == 1.0);
    CHECK(bump(-0.1, d) == 1.0);
    CHECK(bump(0.2, d) == 0.0);
    CHECK(bump(0.35, d) == 0.0);
    double prev = 1.0;
    for (double x = 0.1; x <= 0.2; x += 0.005) {
        const double b = bump(x, d);
        CHECK(b <= prev + 1e-15);
        CHECK(b >= 0.0);
        prev = b;
    }
    CHECK(default_delta(0.01) == doctest::Approx(0.001));
    CHECK(default_delta(5.0) == doctest::Approx(0.1));
}

TEST_CASE("regularisation: idempotence, orthogonality, inactive cutoffs") {
    const Deformation def = Deformation::random_diagonal(8, 1.0, 4);
    const Mat A = observable(8, 5);
    const RegularizationMap close(def, cd(0.01, 0.02), cd(0.02, -0.03), 0.1);
    REQUIRE(close.cut(1) == 1.0);
    REQUIRE(close.cut(-1) == 1.0);
    const RegularizedObservable r = close.apply(A);
    CHECK(maxabs(close.apply(r.A_reg).A_reg - r.A_reg) < 1e-12);
    for (int s : {1, -1}) CHECK(std::abs(close.coefficient(r.A_reg, s)) < 1e-12);
    // E+ and E- themselves regularise to 0
    CHECK(maxabs(close.apply(e_plus(8)).A_reg) < 1e-12);
    CHECK(maxabs(close.apply(e_minus(8)).A_reg) < 1e-12);

    const RegularizationMap far(def, cd(0.3, 0.2), cd(-0.1, 0.3), 0.1);
    CHECK(far.cut(1) == 0.0);
    CHECK(far.cut(-1) == 0.0);
    CHECK(maxabs(far.apply(A).A_reg - A) == 0.0);
    CHECK_THROWS_AS(RegularizationMap(def, cd(0.1, 0.0), cd(0.1, 0.2), 0.1), Error);
}

TEST_CASE("regularisation perturbation defect") {
    const Deformation def = Deformation::zero(8);
    const Mat A = observable(8, 6);
    const PerturbationDefect d =
        regularize_perturbation_check(def, A, cd(0.01, 0.02), cd(0.0, -0.02), cd(0.015, 0.025), cd(0.005, -0.025), 0.5);
    CHECK(d.within());
}

TEST_CASE("cross traces vanish") {
    const Deformation def = Deformation::random_diagonal(8, 1.0, 7);
    const Mat M1 = solve_mde(def, cd(0.2, 0.1)).M, M2 = solve_mde(def, cd(0.1, -0.3)).M;
    CHECK(std::abs(avg(M1 * M2 * e_minus(8))) < 1e-14);
    CHECK(std::abs(avg(M1 * e_minus(8) * M2)) < 1e-14);
}
