#pragma once

#include <optional>

#include "ethlab/deformation.hpp"

namespace ethlab {

struct SpectralPoint {
    cd w;
    double e = 0.0;
    double eta = 0.0;
    int sign = 0;

    SpectralPoint() = default;
    explicit SpectralPoint(cd z)
        : w(z), e(z.real()), eta(std::abs(z.imag())), sign(z.imag() > 0 ? 1 : (z.imag() < 0 ? -1 : 0)) {}
};

struct MdeSolution {
    SpectralPoint point;
    cd m;
    Mat M;
    double residual = 0.0;
};

// Fixed-point defect |m - (1/N) sum (w+m)/(nu^2-(w+m)^2)|.
double mde_residual(const Deformation& def, cd w, cd m);

// Stieltjes transform m(w) for Im w != 0. An optional guess switches to a
// warm-started Newton solve.
cd solve_m(const Deformation& def, cd w, std::optional<cd> guess = std::nullopt);

// lim_{eta -> 0+} m(e + i eta).
cd boundary_m(const Deformation& def, double e);

// Matrix solution from the SVD of Lambda; w may be real if m is a boundary value.
Mat build_M(const Deformation& def, cd w, cd m);

// Coefficients of M in the singular basis of Lambda: M11 = U diag(d) U^*,
// M22 = V diag(d) V^*, M12 = U diag(o) V^*, M21 = V diag(o) U^*.
void m_coefficients(const Deformation& def, cd w, cd m, Vec& d, Vec& o);

MdeSolution solve_mde(const Deformation& def, cd w);

// Self-consistent density rho(e) = Im m(e + i0) / pi.
double scdos(const Deformation& def, double e);

}  // namespace ethlab
