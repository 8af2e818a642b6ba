#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ethlab/density.hpp"
#include "ethlab/linalg.hpp"
#include "ethlab/mde.hpp"

using namespace ethlab;

namespace {

// Semicircle on [-2, 2]: the symmetrised singular value law of a Ginibre matrix.
double semicircle_cdf(double x) {
    if (x <= -2) return 0.0;
    if (x >= 2) return 1.0;
    return 0.5 + x * std::sqrt(4 - x * x) / (4 * std::numbers::pi) + std::asin(x / 2) / std::numbers::pi;
}

double semicircle_quantile(double p) {
    double lo = -2, hi = 2;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (semicircle_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Roots of -m^3 - 2w m^2 + (|z|^2 - w^2 - 1) m - w, the scalar equation for L = -z I.
std::vector<cd> shift_cubic_roots(cd w, double absz) {
    Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
    // monic form m^3 + 2w m^2 - (|z|^2 - w^2 - 1) m + w
    const cd c2 = 2.0 * w, c1 = -(absz * absz - w * w - 1.0), c0 = w;
    comp(0, 2) = -c0;
    comp(1, 2) = -c1;
    comp(2, 2) = -c2;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp);
    return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

}  // namespace

TEST_CASE("semicircle Stieltjes transform at w = i") {
    const Deformation def = Deformation::zero(16);
    const cd m = solve_m(def, cd(0, 1));
    CHECK(std::abs(m - cd(0, (std::sqrt(5.0) - 1) / 2)) < 1e-12);
    CHECK(mde_residual(def, cd(0, 1), m) < 1e-12);
    // closed form (-w + sqrt(w^2 - 4)) / 2 on the upper branch
    const cd w(0.7, 0.05);
    cd root = std::sqrt(w * w - 4.0);
    if (root.imag() < 0) root = -root;
    CHECK(std::abs(solve_m(def, w) - (-w + root) / 2.0) < 1e-12);
}

TEST_CASE("conjugation and boundary values") {
    const Deformation def = Deformation::random_diagonal(20, 1.0, 3);
    const cd w(0.2, 0.3);
    CHECK(std::abs(solve_m(def, std::conj(w)) - std::conj(solve_m(def, w))) < 1e-12);
    CHECK(std::abs(boundary_m(Deformation::zero(8), 0.0) - cd(0, 1)) < 1e-10);
    CHECK(scdos(Deformation::zero(8), 0.0) == doctest::Approx(1 / std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("shift deformation matches the cubic oracle") {
    const double absz = 0.5;
    const Deformation def = Deformation::shift(12, cd(absz, 0));
    for (cd w : {cd(0.3, 0.1), cd(-1.1, 0.02), cd(0.0, 2.0)}) {
        const cd m = solve_m(def, w);
        double best = 1e300;
        for (cd r : shift_cubic_roots(w, absz)) best = std::min(best, std::abs(r - m));
        CHECK(best < 1e-10);
        CHECK(m.imag() * w.imag() > 0);
    }
}

TEST_CASE("matrix solution satisfies the matrix equation") {
    const Deformation def = Deformation::random_diagonal(10, 1.0, 11);
    const cd w(-0.4, 0.15);
    const MdeSolution s = solve_mde(def, w);
    const int dim = 20;
    const Mat lhs = s.M * (def.hat() - w * Mat::Identity(dim, dim) - s_op(s.M));
    CHECK((lhs - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(avg(s.M) - s.m) < 1e-12);
    CHECK(std::abs(avg_em(s.M)) < 1e-12);
}

TEST_CASE("invalid spectral parameters") {
    const Deformation def = Deformation::zero(4);
    CHECK_THROWS_AS(solve_m(def, cd(0.3, 0.0)), Error);
    try {
        solve_m(def, cd(0.3, 0.0));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("density profile of the zero deformation") {
    const DensityProfile dp(Deformation::zero(8));
    CHECK(dp.mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(dp.cdf(1.0) == doctest::Approx(semicircle_cdf(1.0)).epsilon(1e-9));
    // resolution is set by the smallest eta of the boundary continuation
    CHECK(std::abs(dp.support_edge() - 2.0) < 1e-6);
    const auto bulk = dp.bulk(0.01);
    REQUIRE(bulk.size() == 1);
    const double edge = std::sqrt(4 - std::pow(2 * std::numbers::pi * std::cbrt(0.01), 2));
    CHECK(bulk[0].hi == doctest::Approx(edge).epsilon(1e-8));
    CHECK(bulk[0].lo == doctest::Approx(-edge).epsilon(1e-8));
    CHECK_THROWS_AS(dp.bulk(1.5), Error);
}

TEST_CASE("quantiles against the semicircle distribution function") {
    const int n = 100;
    const QuantileTable q = quantiles(Deformation::zero(n), n);
    CHECK(q.at(0) == 0.0);
    for (int i : {-73, -10, 1, 25, 50, 99}) {
        CHECK(q.at(i) == doctest::Approx(semicircle_quantile(double(i + n) / (2.0 * n))).epsilon(1e-9));
        CHECK(q.at(-i) == doctest::Approx(-q.at(i)).epsilon(1e-12));
    }
    CHECK(q.at(50) == doctest::Approx(0.807945506599).epsilon(1e-9));
}

TEST_CASE("two-interval density when the shift leaves the disk") {
    const DensityProfile dp(Deformation::shift(16, cd(1.5, 0)));
    const auto bulk = dp.bulk(0.001);
    REQUIRE(bulk.size() == 2);
    CHECK(bulk[0].hi < 0);
    CHECK(bulk[1].lo > 0);
    CHECK(dp.mass() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("table quantile agrees with the refined quantile") {
    const Deformation def = Deformation::random_diagonal(32, 1.0, 5);
    const DensityProfile dp(def);
    const QuantileTable q = dp.quantiles(32);
    for (int i : {-20, -3, 4, 17}) {
        const double rho = scdos(def, q.at(i));
        CHECK(std::abs(dp.table_quantile(double(i + 32) / 64.0) - q.at(i)) < 2.0 / (32 * rho));
    }
}

TEST_CASE("non-Hermitian bulk test") {
    const Deformation def = Deformation::zero(64);
    // Lambda = 0: (1/(|z|^2 + kappa^{2/3})) >= 1
    CHECK(in_nonhermitian_bulk(def, cd(0.5, 0.3), 0.216));
    CHECK_FALSE(in_nonhermitian_bulk(def, cd(0.9, 0.0), 0.216));
    // full-matrix path agrees with the diagonal shortcut
    Mat l = Mat::Zero(8, 8);
    l(0, 0) = 0.3;
    const Deformation diag(l, "d");
    Mat rot = Mat::Identity(8, 8);
    rot(0, 0) = rot(1, 1) = std::sqrt(0.5);
    rot(0, 1) = std::sqrt(0.5);
    rot(1, 0) = -std::sqrt(0.5);
    const Deformation full(rot * l * rot.adjoint(), "f");
    for (cd z : {cd(0.1, 0.2), cd(0.85, 0.0), cd(0.2, -0.7)})
        CHECK(in_nonhermitian_bulk(diag, z, 0.1) == in_nonhermitian_bulk(full, z, 0.1));
}
