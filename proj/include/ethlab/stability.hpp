#pragma once

#include <vector>
#include <nlohmann/json.hpp>

#include "ethlab/mde.hpp"

namespace ethlab {

// Nontrivial eigentriple of B[T] = T - M1 S[T] M2: R = M1 E_s M2, L = E_s.
struct Eigentriple {
    cd beta;
    Mat R;
    Mat L;
    int sigma = 1;
    cd norm;  // <L, R> = <E_s R>
};

struct StabilityEigs {
    Eigentriple plus, minus;
    int critical_sign = 1;  // -sgn(Im w1 Im w2)
    const Eigentriple& critical() const { return critical_sign > 0 ? plus : minus; }
    const Eigentriple& get(int sigma) const { return sigma > 0 ? plus : minus; }
};

StabilityEigs stability_eigs(const MdeSolution& m1, const MdeSolution& m2);

// B[T] applied directly.
Mat stability_apply(const Mat& M1, const Mat& M2, const Mat& t);

// Reference values: eigenvalues of 1 - (T -> M1 S[T] M2) restricted to
// span{E+, E-, R+, R-} (rank-revealed), from a dense representation.
std::vector<cd> stability_eigs_bruteforce(const Mat& M1, const Mat& M2);

// Smooth plateau: 1 on |x| <= delta/2, 0 on |x| >= delta.
double bump(double x, double delta);

struct Cutoffs {
    double plus = 0.0;
    double minus = 0.0;
    double get(int sigma) const { return sigma > 0 ? plus : minus; }
};
Cutoffs cutoffs(cd w, cd wp, double delta);

double default_delta(double kappa);

struct RegularizedObservable {
    Mat A;
    SpectralPoint w, wp;
    double delta = 0.0;
    double cut_plus = 0.0, cut_minus = 0.0;
    cd coeff_plus, coeff_minus;  // coefficients of E+ / E-
    cd den_plus, den_minus;
    Mat A_reg;
};

// Caches M(w), M(Re w' +- i Im w') so many observables can be regularised
// against the same pair.
class RegularizationMap {
public:
    RegularizationMap(const Deformation& def, cd w, cd wp, double delta);

    RegularizedObservable apply(const Mat& a) const;
    // Coefficient of E_sigma and active flag without forming the new matrix.
    cd coefficient(const Mat& a, int sigma) const;
    double cut(int sigma) const { return cut_.get(sigma); }
    int sign() const { return s_; }
    const Mat& M_w() const { return Mw_; }
    // M at the second argument of the sigma branch.
    const Mat& M_branch(int sigma) const { return sigma > 0 ? Mplus_ : Mminus_; }
    cd denominator(int sigma) const { return sigma > 0 ? den_plus_ : den_minus_; }

private:
    Deformation def_;
    cd w_, wp_;
    double delta_;
    int s_;
    Cutoffs cut_;
    Mat Mw_, Mplus_, Mminus_;
    cd den_plus_, den_minus_;
};

RegularizedObservable regularize(const Deformation& def, const Mat& a, cd w, cd wp, double delta);

struct PerturbationDefect {
    // Largest |coefficient| of the E+/E- components of the differences.
    double first = 0.0;
    double second = 0.0;
    // Frobenius size of what remains after removing the span{E+, E-} part.
    double residual_first = 0.0;
    double residual_second = 0.0;
    double bound_first = 0.0;  // C (|w1 - w2| ^ 1)
    double bound_second = 0.0;
    bool within() const { return first <= bound_first && second <= bound_second; }
};
inline constexpr double kPerturbConstant = 20.0;
PerturbationDefect regularize_perturbation_check(const Deformation& def, const Mat& a, cd w1, cd w1p,
                                                 cd w2, cd w2p, double delta);

// X12[B] = (1 - S[M1 . M2])^{-1}[B].
Mat x_op(const Mat& b, const Mat& M1, const Mat& M2);
// B12^{-1}[Y] for B[T] = T - M1 S[T] M2.
Mat stability_inverse(const Mat& y, const Mat& M1, const Mat& M2);

void to_json(nlohmann::json& j, const Eigentriple& t);
void to_json(nlohmann::json& j, const StabilityEigs& e);
void to_json(nlohmann::json& j, const RegularizedObservable& r);

}  // namespace ethlab
