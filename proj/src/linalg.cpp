#include "ethlab/linalg.hpp"

#include <unistd.h>

#include <cstdlib>
#include <cstring>

#include <lapacke.h>

extern "C" char* openblas_get_corename(void);

namespace ethlab {

void blas_guard(char** argv) {
    if (std::getenv("OPENBLAS_CORETYPE")) return;
    if (std::strcmp(openblas_get_corename(), "Cooperlake") != 0) return;
    setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
    execv("/proc/self/exe", argv);
    // exec failed: continue with the default kernels
}


const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularDenominator: return "SingularDenominator";
        case ErrorCode::EmptyBulk: return "EmptyBulk";
        case ErrorCode::UnstableDenominator: return "UnstableDenominator";
        case ErrorCode::SingularStability: return "SingularStability";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::TrackingLoss: return "TrackingLoss";
        case ErrorCode::InsufficientTrials: return "InsufficientTrials";
        case ErrorCode::QuadratureFailure: return "QuadratureFailure";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::NoReports: return "NoReports";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

cd avg(const Mat& a) { return a.trace() / double(a.rows()); }

cd avg_prod(const Mat& a, const Mat& b) {
    // Tr(AB) = sum_ij A_ij B_ji
    return (a.array() * b.transpose().array()).sum() / double(a.rows());
}

cd avg_em(const Mat& a) {
    const Eigen::Index n = a.rows() / 2;
    return (a.topLeftCorner(n, n).trace() - a.bottomRightCorner(n, n).trace()) / double(a.rows());
}

Mat e_plus(int n) { return Mat::Identity(2 * n, 2 * n); }

Mat e_minus(int n) {
    Mat e = Mat::Identity(2 * n, 2 * n);
    e.bottomRightCorner(n, n) *= -1.0;
    return e;
}

Mat em_left(const Mat& a) {
    Mat r = a;
    const Eigen::Index n = a.rows() / 2;
    r.bottomRows(n) *= -1.0;
    return r;
}

Mat em_right(const Mat& a) {
    Mat r = a;
    const Eigen::Index n = a.cols() / 2;
    r.rightCols(n) *= -1.0;
    return r;
}

Mat esig_left(int sigma, const Mat& a) { return sigma > 0 ? a : em_left(a); }
Mat esig_right(const Mat& a, int sigma) { return sigma > 0 ? a : em_right(a); }

Mat s_op(const Mat& t) {
    const Eigen::Index n = t.rows() / 2;
    const cd p = avg(t);
    const cd q = avg_em(t);
    Mat r = Mat::Zero(t.rows(), t.cols());
    r.diagonal().head(n).setConstant(p - q);
    r.diagonal().tail(n).setConstant(p + q);
    return r;
}

double opnorm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> s(a);
    return s.singularValues()(0);
}

SvdResult svd(const Mat& a) {
    const int m = int(a.rows()), n = int(a.cols());
    const int k = std::min(m, n);
    Mat work = a;
    SvdResult r;
    r.s.resize(k);
    r.u.resize(m, m);
    Mat vt(n, n);
    int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', m, n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), m, r.s.data(),
                              reinterpret_cast<lapack_complex_double*>(r.u.data()), m,
                              reinterpret_cast<lapack_complex_double*>(vt.data()), n);
    if (info != 0) throw Error(ErrorCode::NoConvergence, "zgesdd info=" + std::to_string(info));
    r.v = vt.adjoint();
    return r;
}

HermEig herm_eig(const Mat& h) {
    const int n = int(h.rows());
    HermEig r;
    r.vectors = h;
    r.values.resize(n);
    int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                              reinterpret_cast<lapack_complex_double*>(r.vectors.data()), n,
                              r.values.data());
    if (info != 0) throw Error(ErrorCode::NoConvergence, "zheevd info=" + std::to_string(info));
    return r;
}

GenEig gen_eig(const Mat& a) {
    const int n = int(a.rows());
    Mat work = a;
    GenEig r;
    r.values.resize(n);
    r.right.resize(n, n);
    int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n,
                             reinterpret_cast<lapack_complex_double*>(work.data()), n,
                             reinterpret_cast<lapack_complex_double*>(r.values.data()), nullptr, n,
                             reinterpret_cast<lapack_complex_double*>(r.right.data()), n);
    if (info != 0) throw Error(ErrorCode::NoConvergence, "zgeev info=" + std::to_string(info));
    return r;
}

}  // namespace ethlab
