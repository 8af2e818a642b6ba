#include "ethlab/deformation.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "ethlab/linalg.hpp"

namespace ethlab {

Deformation::Deformation(const Mat& lambda, std::string label)
    : n_(int(lambda.rows())), label_(std::move(label)) {
    if (lambda.rows() != lambda.cols() || lambda.rows() < 1)
        throw Error(ErrorCode::InvalidArgument, "deformation must be square and non-empty");
    auto d = std::make_shared<Data>();
    d->lambda = lambda;
    SvdResult s = svd(lambda);
    // LAPACK returns descending singular values; store ascending.
    d->nu = s.s.reverse();
    d->u = s.u.rowwise().reverse();
    d->v = s.v.rowwise().reverse();
    Mat rec = d->u * d->nu.cast<cd>().asDiagonal() * d->v.adjoint();
    double scale = std::max(1.0, lambda.norm());
    d->svd_error = (rec - lambda).norm() / scale;

    const double tol = 1e-13 * std::max(1.0, d->nu(n_ - 1));
    for (int i = 0; i < n_; ++i) {
        if (!d->levels.empty() && d->nu(i) - d->levels.back() <= tol) {
            d->weights.back() += 1.0;
        } else {
            d->levels.push_back(d->nu(i));
            d->weights.push_back(1.0);
        }
    }
    for (double& w : d->weights) w /= n_;
    data_ = std::move(d);
}

Deformation Deformation::zero(int n) { return Deformation(Mat::Zero(n, n), "zero"); }

Deformation Deformation::shift(int n, cd z) {
    std::ostringstream os;
    os << "shift:" << z.real() << "," << z.imag();
    return Deformation(Mat::Identity(n, n) * (-z), os.str());
}

Deformation Deformation::diagonal(const RVec& d, std::string label) {
    return Deformation(Mat(d.cast<cd>().asDiagonal()), std::move(label));
}

Deformation Deformation::random_diagonal(int n, double scale, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    RVec d(n);
    for (int i = 0; i < n; ++i) d(i) = dist(gen);
    std::ostringstream os;
    os << "randdiag:" << scale << "," << seed;
    return diagonal(d, os.str());
}

namespace {

std::pair<double, double> parse_pair(const std::string& s, const std::string& spec) {
    auto comma = s.find(',');
    if (comma == std::string::npos)
        throw Error(ErrorCode::ConfigError, "deformation: expected <a>,<b> in '" + spec + "'");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "deformation: malformed numbers in '" + spec + "'");
    }
}

}  // namespace

Deformation Deformation::from_spec(const std::string& spec, int n) {
    if (spec == "zero") return zero(n);
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::ConfigError, "deformation: unknown spec '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "shift") {
        auto [re, im] = parse_pair(arg, spec);
        return shift(n, cd(re, im));
    }
    if (kind == "randdiag") {
        auto [scale, seed] = parse_pair(arg, spec);
        return random_diagonal(n, scale, std::uint64_t(seed));
    }
    if (kind == "diag" || kind == "full") {
        std::ifstream in(arg);
        if (!in) throw Error(ErrorCode::ConfigError, "deformation: cannot open '" + arg + "'");
        if (kind == "diag") {
            std::vector<double> vals;
            double x;
            while (in >> x) vals.push_back(x);
            if (int(vals.size()) != n)
                throw Error(ErrorCode::ConfigError,
                            "deformation: diag file has " + std::to_string(vals.size()) +
                                " entries, expected " + std::to_string(n));
            return diagonal(Eigen::Map<RVec>(vals.data(), n), spec);
        }
        Mat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                std::string tok;
                if (!(in >> tok))
                    throw Error(ErrorCode::ConfigError, "deformation: full file too short");
                auto [re, im] = parse_pair(tok, spec);
                a(i, j) = cd(re, im);
            }
        return Deformation(a, spec);
    }
    throw Error(ErrorCode::ConfigError, "deformation: unknown kind '" + kind + "'");
}

Mat Deformation::hat() const {
    Mat h = Mat::Zero(2 * n_, 2 * n_);
    h.topRightCorner(n_, n_) = entries();
    h.bottomLeftCorner(n_, n_) = entries().adjoint();
    return h;
}

}  // namespace ethlab
