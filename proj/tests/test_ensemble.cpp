#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "ethlab/ensemble.hpp"
#include "ethlab/linalg.hpp"

using namespace ethlab;

namespace {

double maxabs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("entry moments") {
    for (Dist d : {Dist::ComplexGaussian, Dist::UniformPhase}) {
        const int n = 300;
        const Mat x = sample_iid({n, d, 42}) * std::sqrt(double(n));
        const double count = double(n) * n;
        const cd m1 = x.sum() / count;
        const double m2 = x.cwiseAbs2().sum() / count;
        const cd m2c = x.cwiseProduct(x).sum() / count;
        CHECK(std::abs(m1) < 0.01);
        CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
        CHECK(std::abs(m2c) < 0.01);
        if (d == Dist::UniformPhase) CHECK((x.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
    }
    CHECK(parse_dist("uniform-phase") == Dist::UniformPhase);
    CHECK(parse_dist(dist_name(Dist::ComplexGaussian)) == Dist::ComplexGaussian);
    CHECK_THROWS_AS(parse_dist("laplace"), Error);
}

TEST_CASE("seeded draws are reproducible") {
    CHECK(sample_iid({20, Dist::ComplexGaussian, 5}) == sample_iid({20, Dist::ComplexGaussian, 5}));
    CHECK(sample_iid({20, Dist::ComplexGaussian, 5}) != sample_iid({20, Dist::ComplexGaussian, 6}));
    CHECK(trial_seed(1, 2) == trial_seed(1, 2));
    CHECK(trial_seed(1, 2) != trial_seed(1, 3));
    CHECK(trial_seed(1, 2) != trial_seed(2, 2));
}

TEST_CASE("Hermitisation and its spectrum") {
    const int n = 12;
    const Deformation def = Deformation::random_diagonal(n, 1.0, 3);
    const Mat x = sample_iid({n, Dist::ComplexGaussian, 9});
    const Mat h = hermitise(x, def.entries());
    CHECK(maxabs(h - h.adjoint()) == 0.0);
    CHECK(maxabs(em_left(em_right(h)) + h) == 0.0);  // chiral symmetry

    const HermSpectrum s = spectral(h);
    CHECK(s.n() == n);
    for (int i = 1; i <= n; ++i) {
        CHECK(s.lambda(-i) == doctest::Approx(-s.lambda(i)).epsilon(1e-12));
        const Vec wi = s.W.col(HermSpectrum::column(i, n));
        const Vec wmi = s.W.col(HermSpectrum::column(-i, n));
        CHECK((wmi - e_minus(n) * wi).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((h * wi - s.lambda(i) * wi).norm() < 1e-12);
    }
    CHECK((s.W.adjoint() * s.W - Mat::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-12);

    const SpectralSample ss = make_sample(x, def);
    for (int i = 1; i <= n; ++i) {
        CHECK(ss.lambda(i) == doctest::Approx(s.lambda(i)).epsilon(1e-12));
        CHECK((ss.w(i) - s.W.col(HermSpectrum::column(i, n))).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK(maxabs(ss.H() - h) == 0.0);
}

TEST_CASE("resolvent from the spectrum and Ward identity") {
    const int n = 10;
    const Mat h = hermitise(sample_iid({n, Dist::ComplexGaussian, 2}), Mat::Zero(n, n));
    const HermSpectrum s = spectral(h);
    const cd w(0.3, 0.05);
    const Mat g = resolvent(s, w), g2 = resolvent(h, w);
    CHECK(maxabs(g - g2) < 1e-10);
    CHECK(maxabs((h - w * Mat::Identity(2 * n, 2 * n)) * g - Mat::Identity(2 * n, 2 * n)) < 1e-10);
    // G G^* = Im G / eta
    const Mat lhs = g * g.adjoint();
    const Mat rhs = (g - g.adjoint()) / (2.0 * I_UNIT * w.imag());
    CHECK(maxabs(lhs - rhs) < 1e-9);
}

TEST_CASE("large LAPACK drivers reconstruct their input") {
    for (int n : {512, 1024}) {
        const Mat x = sample_iid({n, Dist::ComplexGaussian, std::uint64_t(n)});
        const SvdResult r = svd(x);
        const Mat back = r.u * r.s.cast<cd>().asDiagonal() * r.v.adjoint();
        CHECK(maxabs(back - x) < 1e-10);
        const Mat h = (x + x.adjoint()) / 2.0;
        const HermEig e = herm_eig(h);
        CHECK(maxabs(h * e.vectors - e.vectors * e.values.cast<cd>().asDiagonal()) < 1e-10);
    }
}

TEST_CASE("left and right eigenvectors") {
    SUBCASE("normal matrix has unit overlaps") {
        const int n = 8;
        const Mat q = svd(sample_iid({n, Dist::ComplexGaussian, 4})).u;
        Vec d(n);
        for (int i = 0; i < n; ++i) d(i) = cd(std::cos(i), std::sin(2.0 * i));
        const LeftRight lr = left_right(q * d.asDiagonal() * q.adjoint());
        CHECK(lr.biorthogonality < 1e-12);
        CHECK(maxabs(lr.O - Mat::Identity(n, n)) < 1e-10);
    }
    SUBCASE("finite difference condition number") {
        const int n = 16;
        const Mat y = sample_iid({n, Dist::ComplexGaussian, 8});
        const LeftRight lr = left_right(y);
        CHECK(lr.biorthogonality < 1e-10);
        for (int i = 0; i < n; ++i) CHECK(lr.O(i, i).real() >= 1.0 - 1e-10);
        for (int i : {0, 5, 11})
            CHECK(condition_number_fd(y, lr, i, 1e-7) == doctest::Approx(condition_number(lr, i)).epsilon(1e-3));
        // rows of O sum to 1
        for (int i = 0; i < n; ++i) CHECK(std::abs(lr.O.row(i).sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("OU flow") {
    const int n = 10;
    const Mat x0 = sample_iid({n, Dist::ComplexGaussian, 3});
    const OuTrajectory t0 = ou_flow(x0, Mat::Zero(n, n), 1e-3, 0.0, 1);
    REQUIRE(t0.mus.size() == 1);
    CHECK((t0.mus[0] - gen_eig(x0).values).cwiseAbs().maxCoeff() == 0.0);
    const OuTrajectory t = ou_flow(x0, Mat::Zero(n, n), 1e-3, 0.01, 1);
    CHECK(t.times.size() == 11);
    CHECK(t.times.back() == doctest::Approx(0.01));
    CHECK_THROWS_AS(ou_flow(x0, Mat::Zero(n, n), 0.1, 0.5, 1), Error);
    CHECK_THROWS_AS(ou_flow(x0, Mat::Zero(n, n), 1e-3, 2.0, 1), Error);
}

TEST_CASE("sample dump round trip") {
    const SampleConfig cfg{7, Dist::UniformPhase, 77};
    const Mat x = sample_iid(cfg);
    const auto path = std::filesystem::temp_directory_path() / "ethlab_dump_test.txt";
    dump_sample(path.string(), x, cfg);
    SampleConfig back;
    const Mat y = load_sample(path.string(), &back);
    std::filesystem::remove(path);
    CHECK(maxabs(x - y) == 0.0);
    CHECK(back.n == 7);
    CHECK(back.dist == Dist::UniformPhase);
    CHECK(back.seed == 77);
}

TEST_CASE("parallel_for is order independent") {
    std::vector<double> a(40), b(40);
    auto work = [](std::vector<double>& out) {
        return [&out](int t) { out[std::size_t(t)] = sample_iid({6, Dist::ComplexGaussian, trial_seed(9, t)}).norm(); };
    };
    parallel_for(40, 1, work(a));
    parallel_for(40, 4, work(b));
    CHECK(a == b);
    CHECK_THROWS(parallel_for(5, 3, [](int t) {
        if (t == 3) throw Error(ErrorCode::InvalidArgument, "boom");
    }));
}
