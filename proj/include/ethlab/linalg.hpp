#pragma once

#include "ethlab/types.hpp"

// Block helpers for 2N x 2N matrices and thin LAPACK wrappers.
namespace ethlab {

// Normalised trace <A> = Tr A / dim.
cd avg(const Mat& a);
// <A B> without forming the product.
cd avg_prod(const Mat& a, const Mat& b);
// <A E_->, i.e. (Tr A11 - Tr A22) / 2N.
cd avg_em(const Mat& a);

Mat e_plus(int n);   // identity of size 2n
Mat e_minus(int n);  // diag(I, -I)
// E_- A and A E_- by sign flips.
Mat em_left(const Mat& a);
Mat em_right(const Mat& a);
// E_sigma A, A E_sigma for sigma = +1 / -1.
Mat esig_left(int sigma, const Mat& a);
Mat esig_right(const Mat& a, int sigma);

// S[T] = sum_sigma sigma <T E_sigma> E_sigma = <T> I - <T E_-> E_-.
Mat s_op(const Mat& t);

double opnorm(const Mat& a);

// OpenBLAS 0.3.20 returns wrong zgesdd/zheevd results with its Cooperlake
// kernels. When that core is active and OPENBLAS_CORETYPE is unset, re-executes
// the process with OPENBLAS_CORETYPE=SkylakeX. Call first thing in main().
void blas_guard(char** argv);

struct SvdResult {
    RVec s;  // descending
    Mat u;
    Mat v;
};
// Full SVD A = U diag(s) V^* (LAPACK zgesdd).
SvdResult svd(const Mat& a);

struct HermEig {
    RVec values;  // ascending
    Mat vectors;
};
HermEig herm_eig(const Mat& h);

struct GenEig {
    Vec values;
    Mat right;  // columns
};
GenEig gen_eig(const Mat& a);

// Compensated (Neumaier) accumulators.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CKahanSum {
public:
    void add(cd x) {
        re_.add(x.real());
        im_.add(x.imag());
    }
    cd value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

}  // namespace ethlab
