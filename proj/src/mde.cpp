#include "ethlab/mde.hpp"

#include <cmath>
#include <numbers>

#include "ethlab/linalg.hpp"

namespace ethlab {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kNewtonTol = 1e-14;

// F(m) = (1/N) sum a/(nu^2 - a^2) with a = w + m, and dF/dm.
void eval_map(const Deformation& def, cd w, cd m, cd& f, cd* df) {
    const cd a = w + m;
    const cd a2 = a * a;
    const auto& lv = def.levels();
    const auto& wt = def.weights();
    CKahanSum sf, sd;
    for (std::size_t k = 0; k < lv.size(); ++k) {
        const double n2 = lv[k] * lv[k];
        const cd den = n2 - a2;
        const cd inv = 1.0 / den;
        sf.add(wt[k] * a * inv);
        if (df) sd.add(wt[k] * (n2 + a2) * inv * inv);
    }
    f = sf.value();
    if (df) *df = sd.value();
}

bool sign_ok(cd w, cd m) {
    if (w.imag() == 0.0) return m.imag() >= -1e-12;
    return m.imag() * w.imag() > 0.0;
}

// Newton iteration on m - F(m) = 0; rejects steps that leave the correct half-plane.
bool newton(const Deformation& def, cd w, cd& m, int max_iter = 60) {
    cd x = m;
    for (int it = 0; it < max_iter; ++it) {
        cd f, df;
        eval_map(def, w, x, f, &df);
        const cd r = x - f;
        if (std::abs(r) <= kNewtonTol * (1.0 + std::abs(x))) {
            if (!sign_ok(w, x)) return false;
            m = x;
            return true;
        }
        const cd jac = 1.0 - df;
        if (std::abs(jac) < 1e-300) return false;
        cd step = r / jac;
        cd next = x - step;
        int halvings = 0;
        while (w.imag() != 0.0 && !sign_ok(w, next) && halvings < 40) {
            step *= 0.5;
            next = x - step;
            ++halvings;
        }
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) return false;
        x = next;
    }
    return false;
}

// Damped fixed-point iteration from i*sgn(Im w).
cd fixed_point(const Deformation& def, cd w) {
    cd m(0.0, w.imag() > 0 ? 1.0 : -1.0);
    double alpha = 0.5;
    double prev = std::numeric_limits<double>::infinity();
    int decreasing = 0;
    for (int it = 0; it < 20000; ++it) {
        cd f;
        eval_map(def, w, m, f, nullptr);
        const double defect = std::abs(f - m);
        if (defect <= kNewtonTol * (1.0 + std::abs(m))) return f;
        decreasing = defect < prev ? decreasing + 1 : 0;
        if (decreasing >= 5) alpha = 1.0;
        prev = defect;
        m = (1.0 - alpha) * m + alpha * f;
    }
    return m;
}

}  // namespace

double mde_residual(const Deformation& def, cd w, cd m) {
    cd f;
    eval_map(def, w, m, f, nullptr);
    return std::abs(m - f);
}

cd solve_m(const Deformation& def, cd w, std::optional<cd> guess) {
    if (w.imag() == 0.0) throw Error(ErrorCode::InvalidArgument, "solve_m requires Im w != 0");
    if (std::abs(w) > 1e6) throw Error(ErrorCode::InvalidArgument, "solve_m requires |w| <= 1e6");
    if (guess) {
        cd m = *guess;
        if (newton(def, w, m) && mde_residual(def, w, m) <= kResidualTol) return m;
    }
    const double sgn = w.imag() > 0 ? 1.0 : -1.0;
    const double eta_t = std::abs(w.imag());
    double eta = std::max(eta_t, 1.0);
    cd m = fixed_point(def, cd(w.real(), sgn * eta));
    newton(def, cd(w.real(), sgn * eta), m);
    // Geometric continuation towards the target imaginary part.
    double ratio = 0.5;
    while (eta > eta_t) {
        const double next = std::max(eta_t, eta * ratio);
        cd trial = m;
        if (newton(def, cd(w.real(), sgn * next), trial) && std::abs(trial - m) < 0.5) {
            m = trial;
            eta = next;
            ratio = std::max(0.5, ratio * ratio);
        } else {
            ratio = std::sqrt(ratio);
            if (ratio > 1.0 - 1e-9)
                throw Error(ErrorCode::NoConvergence, "continuation stalled at eta=" + std::to_string(eta));
        }
    }
    const double res = mde_residual(def, w, m);
    if (res > kResidualTol || !sign_ok(w, m))
        throw Error(ErrorCode::NoConvergence, "fixed-point residual " + std::to_string(res));
    return m;
}

cd boundary_m(const Deformation& def, double e) {
    constexpr double kFloor = 1e-7;
    cd m = solve_m(def, cd(e, 1.0));
    cd prev = m;
    double eta = 1.0;
    bool settled = false;
    for (int j = 1; eta > kFloor; ++j) {
        eta = std::max(kFloor, std::ldexp(1.0, -j));
        prev = m;
        m = solve_m(def, cd(e, eta), m);
        if (std::abs(m - prev) < 1e-7) {
            settled = true;
            break;
        }
    }
    // Polish on the real axis: in the bulk and outside the support the
    // boundary value is a regular root there.
    cd polished = m;
    if (newton(def, cd(e, 0.0), polished) && std::abs(polished - m) < 1e-4 &&
        mde_residual(def, cd(e, 0.0), polished) <= kResidualTol) {
        if (polished.imag() < 0.0) polished.imag(0.0);
        return polished;
    }
    if (settled || std::abs(m - prev) < 1e-3) return m;
    throw Error(ErrorCode::NoConvergence,
                "boundary continuation unstable at e=" + std::to_string(e) + " (last eta " +
                    std::to_string(eta) + ")");
}

void m_coefficients(const Deformation& def, cd w, cd m, Vec& d, Vec& o) {
    const int n = def.dim();
    const cd a = w + m;
    const RVec& nu = def.nu();
    d.resize(n);
    o.resize(n);
    double min_den = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const cd den = nu(i) * nu(i) - a * a;
        min_den = std::min(min_den, std::abs(den));
        d(i) = a / den;
        o(i) = nu(i) / den;
    }
    if (min_den < 1e-12)
        throw Error(ErrorCode::SingularDenominator, "min |nu^2-(w+m)^2| = " + std::to_string(min_den));
}

Mat build_M(const Deformation& def, cd w, cd m) {
    const int n = def.dim();
    Vec d, o;
    m_coefficients(def, w, m, d, o);
    const Mat& U = def.u();
    const Mat& V = def.v();
    Mat M(2 * n, 2 * n);
    M.topLeftCorner(n, n).noalias() = U * d.asDiagonal() * U.adjoint();
    M.bottomRightCorner(n, n).noalias() = V * d.asDiagonal() * V.adjoint();
    M.topRightCorner(n, n).noalias() = U * o.asDiagonal() * V.adjoint();
    M.bottomLeftCorner(n, n).noalias() = V * o.asDiagonal() * U.adjoint();
    return M;
}

MdeSolution solve_mde(const Deformation& def, cd w) {
    MdeSolution s;
    s.point = SpectralPoint(w);
    s.m = solve_m(def, w);
    s.M = build_M(def, w, s.m);
    s.residual = mde_residual(def, w, s.m);
    return s;
}

double scdos(const Deformation& def, double e) {
    return std::max(0.0, boundary_m(def, e).imag()) / std::numbers::pi;
}

}  // namespace ethlab
