#include "ethlab/stability.hpp"

#include <cmath>

#include "ethlab/linalg.hpp"

namespace ethlab {

namespace {

int sgn(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }
int idx(int sigma) { return sigma > 0 ? 0 : 1; }

// K(s, t) = s <M1 E_t M2 E_s>, indices 0 -> +, 1 -> -.
Eigen::Matrix2cd coupling(const Mat& M1, const Mat& M2) {
    Eigen::Matrix2cd k;
    for (int s : {1, -1}) {
        const Mat m2s = esig_right(M2, s);
        for (int t : {1, -1}) k(idx(s), idx(t)) = double(s) * avg_prod(esig_right(M1, t), m2s);
    }
    return k;
}

Eigen::Vector2cd solve_rank2(const Eigen::Matrix2cd& k, const Eigen::Vector2cd& b) {
    const cd bp = 1.0 - k(0, 0), bm = 1.0 - k(1, 1);
    if (std::abs(bp) < 1e-10 || std::abs(bm) < 1e-10)
        throw Error(ErrorCode::SingularStability,
                    "|beta+|=" + std::to_string(std::abs(bp)) + " |beta-|=" + std::to_string(std::abs(bm)));
    const Eigen::Matrix2cd a = Eigen::Matrix2cd::Identity() - k;
    return a.partialPivLu().solve(b);
}

Eigentriple make_triple(const Mat& M1, const Mat& M2, int sigma) {
    Eigentriple t;
    t.sigma = sigma;
    t.R = M1 * esig_left(sigma, M2);
    t.L = sigma > 0 ? e_plus(int(M1.rows() / 2)) : e_minus(int(M1.rows() / 2));
    t.norm = sigma > 0 ? avg(t.R) : avg_em(t.R);
    t.beta = 1.0 - double(sigma) * t.norm;
    return t;
}

}  // namespace

StabilityEigs stability_eigs(const MdeSolution& m1, const MdeSolution& m2) {
    StabilityEigs e;
    e.plus = make_triple(m1.M, m2.M, 1);
    e.minus = make_triple(m1.M, m2.M, -1);
    const int s = -sgn(m1.point.w.imag() * m2.point.w.imag());
    e.critical_sign = s == 0 ? 1 : s;
    return e;
}

Mat stability_apply(const Mat& M1, const Mat& M2, const Mat& t) { return t - M1 * s_op(t) * M2; }

std::vector<cd> stability_eigs_bruteforce(const Mat& M1, const Mat& M2) {
    const int dim = int(M1.rows());
    const int n = dim / 2;
    const std::vector<Mat> basis = {e_plus(n), e_minus(n), M1 * M2, M1 * e_minus(n) * M2};
    Mat vec(Eigen::Index(dim) * dim, 4);
    for (int j = 0; j < 4; ++j) vec.col(j) = basis[j].reshaped();
    // Orthonormal basis of the span, dropping numerically dependent directions.
    Eigen::JacobiSVD<Mat> sv(vec, Eigen::ComputeThinU);
    const double smax = sv.singularValues()(0);
    int rank = 0;
    while (rank < 4 && sv.singularValues()(rank) > 1e-10 * smax) ++rank;
    const Mat q = sv.matrixU().leftCols(rank);
    Mat phi(rank, rank);
    for (int j = 0; j < rank; ++j) {
        const Mat qj = q.col(j).reshaped(dim, dim);
        const Mat img = M1 * s_op(qj) * M2;
        phi.col(j) = q.adjoint() * img.reshaped();
    }
    Eigen::ComplexEigenSolver<Mat> es(Mat::Identity(rank, rank) - phi);
    std::vector<cd> out;
    for (int i = 0; i < rank; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

double bump(double x, double delta) {
    const double a = std::abs(x);
    if (a <= 0.5 * delta) return 1.0;
    if (a >= delta) return 0.0;
    const double t = (a - 0.5 * delta) / (0.5 * delta);
    auto psi = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
    const double p = psi(1.0 - t), q = psi(t);
    return p / (p + q);
}

Cutoffs cutoffs(cd w, cd wp, double delta) {
    if (!(delta > 0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    const double common = bump(w.imag(), delta) * bump(wp.imag(), delta);
    return {bump(w.real() - wp.real(), delta) * common, bump(w.real() + wp.real(), delta) * common};
}

double default_delta(double kappa) { return std::min(0.1, kappa / 10.0); }

RegularizationMap::RegularizationMap(const Deformation& def, cd w, cd wp, double delta)
    : def_(def), w_(w), wp_(wp), delta_(delta) {
    if (w.imag() == 0.0 || wp.imag() == 0.0)
        throw Error(ErrorCode::InvalidArgument, "regularisation needs non-real spectral parameters");
    s_ = -sgn(w.imag() * wp.imag());
    cut_ = cutoffs(w, wp, delta);
    Mw_ = solve_mde(def, w).M;
    for (int sigma : {1, -1}) {
        const int tau = sigma * s_;
        const cd w2(wp.real(), tau * wp.imag());
        Mat m2 = w2 == w ? Mw_ : solve_mde(def, w2).M;
        const cd den = avg_prod(esig_right(Mw_, sigma), esig_right(m2, sigma));
        if (cut_.get(sigma) > 0 && std::abs(den) < 1e-6)
            throw Error(ErrorCode::UnstableDenominator,
                        std::string("branch ") + (sigma > 0 ? "+" : "-") + " denominator " +
                            std::to_string(std::abs(den)) + " (delta too large?)");
        (sigma > 0 ? den_plus_ : den_minus_) = den;
        (sigma > 0 ? Mplus_ : Mminus_) = std::move(m2);
    }
}

cd RegularizationMap::coefficient(const Mat& a, int sigma) const {
    const Mat ma = Mw_ * a;
    return avg_prod(ma, esig_right(M_branch(sigma), sigma)) / denominator(sigma);
}

RegularizedObservable RegularizationMap::apply(const Mat& a) const {
    RegularizedObservable r;
    r.A = a;
    r.w = SpectralPoint(w_);
    r.wp = SpectralPoint(wp_);
    r.delta = delta_;
    r.cut_plus = cut_.plus;
    r.cut_minus = cut_.minus;
    r.den_plus = den_plus_;
    r.den_minus = den_minus_;
    const Mat ma = Mw_ * a;
    r.coeff_plus = avg_prod(ma, Mplus_) / den_plus_;
    r.coeff_minus = avg_prod(ma, em_right(Mminus_)) / den_minus_;
    const int n = int(a.rows() / 2);
    r.A_reg = a;
    const cd cp = r.cut_plus * r.coeff_plus, cm = r.cut_minus * r.coeff_minus;
    for (int i = 0; i < n; ++i) {
        r.A_reg(i, i) -= cp + cm;
        r.A_reg(n + i, n + i) -= cp - cm;
    }
    return r;
}

RegularizedObservable regularize(const Deformation& def, const Mat& a, cd w, cd wp, double delta) {
    return RegularizationMap(def, w, wp, delta).apply(a);
}

namespace {

// Components of d along E+ and E-, and the size of the rest.
void split_span(const Mat& d, double& coeff, double& rest) {
    const cd ap = avg(d), am = avg_em(d);
    coeff = std::max(std::abs(ap), std::abs(am));
    Mat r = d;
    const int n = int(d.rows() / 2);
    for (int i = 0; i < n; ++i) {
        r(i, i) -= ap + am;
        r(n + i, n + i) -= ap - am;
    }
    rest = r.norm() / std::sqrt(double(d.rows()));
}

}  // namespace

PerturbationDefect regularize_perturbation_check(const Deformation& def, const Mat& a, cd w1, cd w1p,
                                                 cd w2, cd w2p, double delta) {
    PerturbationDefect p;
    const Mat base = regularize(def, a, w1, w1p, delta).A_reg;
    const Mat first = regularize(def, a, w2, w1p, delta).A_reg;
    const Mat second = regularize(def, a, w1, w2p, delta).A_reg;
    split_span(first - base, p.first, p.residual_first);
    split_span(second - base, p.second, p.residual_second);
    p.bound_first = kPerturbConstant * std::min(std::abs(w1 - w2), 1.0);
    p.bound_second = kPerturbConstant * std::min(std::abs(w1p - w2p), 1.0);
    return p;
}

Mat x_op(const Mat& b, const Mat& M1, const Mat& M2) {
    const Eigen::Matrix2cd k = coupling(M1, M2);
    const Mat m1b = M1 * b;
    Eigen::Vector2cd rhs;
    rhs(0) = avg_prod(m1b, M2);
    rhs(1) = -avg_prod(m1b, em_right(M2));
    const Eigen::Vector2cd c = solve_rank2(k, rhs);
    Mat y = b;
    const int n = int(b.rows() / 2);
    for (int i = 0; i < n; ++i) {
        y(i, i) += c(0) + c(1);
        y(n + i, n + i) += c(0) - c(1);
    }
    return y;
}

Mat stability_inverse(const Mat& y, const Mat& M1, const Mat& M2) {
    const Eigen::Matrix2cd k = coupling(M1, M2);
    Eigen::Vector2cd rhs(avg(y), -avg_em(y));
    const Eigen::Vector2cd c = solve_rank2(k, rhs);
    return y + M1 * (c(0) * e_plus(int(y.rows() / 2)) + c(1) * e_minus(int(y.rows() / 2))) * M2;
}

namespace {
nlohmann::json cjson(cd z) { return nlohmann::json::array({z.real(), z.imag()}); }
}  // namespace

void to_json(nlohmann::json& j, const Eigentriple& t) {
    j = {{"beta", cjson(t.beta)},
         {"sigma", t.sigma},
         {"norm", cjson(t.norm)},
         {"R_frobenius", t.R.norm() / std::sqrt(double(t.R.rows()))}};
}

void to_json(nlohmann::json& j, const StabilityEigs& e) {
    j = {{"plus", e.plus}, {"minus", e.minus}, {"critical_sign", e.critical_sign}};
}

void to_json(nlohmann::json& j, const RegularizedObservable& r) {
    j = {{"w", cjson(r.w.w)},
         {"wp", cjson(r.wp.w)},
         {"delta", r.delta},
         {"cut_plus", r.cut_plus},
         {"cut_minus", r.cut_minus},
         {"coeff_plus", cjson(r.coeff_plus)},
         {"coeff_minus", cjson(r.coeff_minus)},
         {"den_plus", cjson(r.den_plus)},
         {"den_minus", cjson(r.den_minus)},
         {"A_reg_frobenius", r.A_reg.norm() / std::sqrt(double(r.A_reg.rows()))}};
}

}  // namespace ethlab
