#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <functional>
#include <vector>

#include "ethlab/types.hpp"

namespace ethlab {

// 10-point Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussRule {
    std::vector<double> x, w;
};

inline const GaussRule& gauss10() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, 10>;
        GaussRule r;
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t i = a.size(); i-- > 0;) {
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
        }
        return r;
    }();
    return rule;
}

// Adaptive Gauss-Legendre with step doubling for vector-space valued
// integrands (double, complex, Eigen matrices). Returns the estimate; the
// achieved error bound is written to *err.
template <typename T, typename F, typename Norm>
T adaptive_gauss(F&& f, double a, double b, double tol, Norm&& norm, double* err = nullptr,
                 int max_depth = 40) {
    const GaussRule& g = gauss10();
    auto panel = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        T s = f(c + h * g.x[0]) * (g.w[0] * h);
        for (std::size_t i = 1; i < g.x.size(); ++i) s += f(c + h * g.x[i]) * (g.w[i] * h);
        return s;
    };
    double total_err = 0.0;
    std::function<T(double, double, const T&, double, int)> rec =
        [&](double lo, double hi, const T& whole, double t, int depth) -> T {
        const double mid = 0.5 * (lo + hi);
        T left = panel(lo, mid);
        T right = panel(mid, hi);
        T both = left + right;
        const double e = norm(both - whole);
        if (e <= t || depth >= max_depth) {
            total_err += e;
            return both;
        }
        return rec(lo, mid, left, 0.5 * t, depth + 1) + rec(mid, hi, right, 0.5 * t, depth + 1);
    };
    T whole = panel(a, b);
    T out = rec(a, b, whole, tol, 0);
    if (err) *err = total_err;
    return out;
}

}  // namespace ethlab
