#include "ethlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ethlab/linalg.hpp"
#include "ethlab/mde.hpp"
#include "ethlab/quadrature.hpp"

namespace ethlab {

namespace {

constexpr int kGridPoints = 4001;
constexpr int kRefine = 8;
constexpr double kJump = 0.05;
constexpr double kZero = 1e-12;

// m at a new point, warm-started from the previous one along a path.
cd path_m(const Deformation& def, cd w, cd& last, bool& have_last) {
    cd m = have_last ? solve_m(def, w, last) : solve_m(def, w);
    last = m;
    have_last = true;
    return m;
}

}  // namespace

DensityProfile::DensityProfile(const Deformation& def) : def_(def) {
    box_hi_ = def.norm() + 3.0;
    box_lo_ = -box_hi_;
    std::vector<double> coarse(kGridPoints), rc(kGridPoints);
    const double h = (box_hi_ - box_lo_) / (kGridPoints - 1);
    for (int k = 0; k < kGridPoints; ++k) {
        coarse[k] = box_lo_ + h * k;
        rc[k] = rho_at(coarse[k]);
    }
    // Cells to subdivide: large jumps and the neighbourhood of support edges.
    std::vector<int> refine(kGridPoints - 1, 1);
    for (int k = 0; k + 1 < kGridPoints; ++k) {
        const bool edge = (rc[k] <= kZero) != (rc[k + 1] <= kZero);
        if (std::abs(rc[k + 1] - rc[k]) > kJump) refine[k] = std::max(refine[k], kRefine);
        if (edge)
            for (int j = std::max(0, k - 2); j <= std::min(kGridPoints - 2, k + 2); ++j) refine[j] = kRefine;
    }
    for (int k = 0; k < kGridPoints; ++k) {
        grid_.push_back(coarse[k]);
        rho_.push_back(rc[k]);
        if (k + 1 < kGridPoints) {
            for (int j = 1; j < refine[k]; ++j) {
                const double x = coarse[k] + h * j / refine[k];
                grid_.push_back(x);
                rho_.push_back(rho_at(x));
            }
        }
    }
}

double DensityProfile::rho_at(double e) const { return scdos(def_, e); }

namespace {

// Integral of rho over one grid cell; at a support edge the density is
// modelled as sqrt(alpha (x - a)) from the two inner points.
double cell_integral(const std::vector<double>& x, const std::vector<double>& r, std::size_t k) {
    const double x0 = x[k], x1 = x[k + 1], r0 = r[k], r1 = r[k + 1];
    const bool z0 = r0 <= kZero, z1 = r1 <= kZero;
    if (z0 && !z1 && k + 2 < x.size() && r[k + 2] > kZero) {
        const double alpha = (r[k + 2] * r[k + 2] - r1 * r1) / (x[k + 2] - x1);
        if (alpha > 0) {
            const double a = x1 - r1 * r1 / alpha;
            if (a >= x0 && a <= x1) return 2.0 / 3.0 * r1 * (x1 - a);
        }
    }
    if (z1 && !z0 && k >= 1 && r[k - 1] > kZero) {
        const double alpha = (r[k - 1] * r[k - 1] - r0 * r0) / (x0 - x[k - 1]);
        if (alpha > 0) {
            const double a = x0 + r0 * r0 / alpha;
            if (a >= x0 && a <= x1) return 2.0 / 3.0 * r0 * (a - x0);
        }
    }
    return 0.5 * (r0 + r1) * (x1 - x0);
}

}  // namespace

double DensityProfile::mass() const {
    // Each support component [a, b] is integrated in x = c - r cos(theta),
    // which absorbs the square-root vanishing at both ends.
    auto edge = [&](double in, double out) {
        for (int it = 0; it < 80 && std::abs(out - in) > 1e-14; ++it) {
            const double mid = 0.5 * (in + out);
            (rho_at(mid) > kZero ? in : out) = mid;
        }
        return in;
    };
    KahanSum total;
    const std::size_t n = grid_.size();
    std::size_t k = 0;
    while (k < n) {
        if (rho_[k] <= kZero) {
            ++k;
            continue;
        }
        std::size_t j = k;
        while (j + 1 < n && rho_[j + 1] > kZero) ++j;
        const double a = k > 0 ? edge(grid_[k], grid_[k - 1]) : grid_[k];
        const double b = j + 1 < n ? edge(grid_[j], grid_[j + 1]) : grid_[j];
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        auto f = [&](double th) { return rho_at(c - r * std::cos(th)) * r * std::sin(th); };
        total.add(adaptive_gauss<double>(f, 0.0, std::numbers::pi, 1e-10,
                                         [](double x) { return std::abs(x); }));
        k = j + 1;
    }
    return total.value();
}

double DensityProfile::cdf(double x) const {
    if (x <= box_lo_) return 0.0;
    if (x >= box_hi_) return 1.0;
    const GaussRule& g = gauss10();
    constexpr double kHeight = 1.0;
    // Horizontal leg at height kHeight from 0 to x.
    KahanSum horiz;
    {
        const int panels = std::max(1, int(std::ceil(std::abs(x) / 0.5)));
        const double len = x / panels;
        cd last;
        bool have = false;
        for (int p = 0; p < panels; ++p) {
            const double c = len * (p + 0.5), hh = 0.5 * len;
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double xi = c + hh * (len >= 0 ? g.x[i] : -g.x[g.x.size() - 1 - i]);
                const double wi = len >= 0 ? g.w[i] : g.w[g.x.size() - 1 - i];
                horiz.add(wi * hh * path_m(def_, cd(xi, kHeight), last, have).imag());
            }
        }
    }
    // Vertical leg at Re = x with t = s^2, geometric panels towards s = 0.
    KahanSum vert;
    {
        constexpr int kLevels = 24;
        cd last;
        bool have = false;
        for (int lev = 0; lev <= kLevels; ++lev) {
            const double hi = std::ldexp(1.0, -lev);
            const double lo = lev == kLevels ? 0.0 : 0.5 * hi;
            const double c = 0.5 * (hi + lo), hh = 0.5 * (hi - lo);
            for (std::size_t i = g.x.size(); i-- > 0;) {
                const double s = c + hh * g.x[i];
                const double t = kHeight * s * s;
                const cd m = path_m(def_, cd(x, t), last, have);
                vert.add(g.w[i] * hh * 2.0 * s * kHeight * m.real());
            }
        }
    }
    return 0.5 + (horiz.value() - vert.value()) / std::numbers::pi;
}

std::vector<Interval> DensityProfile::bulk(double kappa) const {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw Error(ErrorCode::InvalidArgument, "kappa must lie in (0,1)");
    const double thr = std::cbrt(kappa);
    auto above = [&](double x) { return rho_at(x) >= thr; };
    auto bisect = [&](double in, double out) {
        for (int it = 0; it < 60 && std::abs(out - in) > 1e-10; ++it) {
            const double mid = 0.5 * (in + out);
            (above(mid) ? in : out) = mid;
        }
        return in;
    };
    std::vector<Interval> out;
    const std::size_t n = grid_.size();
    std::size_t k = 0;
    while (k < n) {
        if (rho_[k] < thr) {
            ++k;
            continue;
        }
        std::size_t j = k;
        while (j + 1 < n && rho_[j + 1] >= thr) ++j;
        Interval iv;
        iv.lo = k > 0 ? bisect(grid_[k], grid_[k - 1]) : grid_[k];
        iv.hi = j + 1 < n ? bisect(grid_[j], grid_[j + 1]) : grid_[j];
        out.push_back(iv);
        k = j + 1;
    }
    if (out.empty())
        throw Error(ErrorCode::EmptyBulk, "no grid point with rho >= kappa^{1/3} for kappa=" + std::to_string(kappa));
    return out;
}

double DensityProfile::support_edge() const {
    std::size_t k = grid_.size() - 1;
    while (k > 0 && rho_[k] <= kZero) --k;
    double in = grid_[k], out = grid_[std::min(k + 1, grid_.size() - 1)];
    for (int it = 0; it < 80 && out - in > 1e-13; ++it) {
        const double mid = 0.5 * (in + out);
        (rho_at(mid) > kZero ? in : out) = mid;
    }
    return in;
}

QuantileTable DensityProfile::quantiles(int n) const {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "quantiles need N >= 1");
    QuantileTable q;
    q.n = n;
    q.values.assign(std::size_t(2 * n + 1), 0.0);
    // Cumulative table for initial guesses and brackets.
    std::vector<double> cum(grid_.size(), 0.0);
    {
        KahanSum s;
        for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
            s.add(cell_integral(grid_, rho_, k));
            cum[k + 1] = s.value();
        }
        const double total = cum.back();
        for (double& c : cum) c /= total;
    }
    const double edge = support_edge();
    for (int i = 1; i < n; ++i) {
        const double target = double(i + n) / (2.0 * n);
        auto it = std::lower_bound(cum.begin(), cum.end(), target);
        std::size_t k = std::size_t(std::max<std::ptrdiff_t>(1, it - cum.begin()));
        const double c0 = cum[k - 1], c1 = cum[k];
        double x = grid_[k - 1] + (c1 > c0 ? (target - c0) / (c1 - c0) : 0.5) * (grid_[k] - grid_[k - 1]);
        double lo = grid_[std::max<std::size_t>(k, 3) - 3];
        double hi = grid_[std::min(k + 2, grid_.size() - 1)];
        lo = std::max(lo, 0.0);
        for (int iter = 0; iter < 80; ++iter) {
            const double f = cdf(x) - target;
            if (std::abs(f) <= 1e-12) break;
            (f > 0 ? hi : lo) = x;
            const double r = rho_at(x);
            double next = r >= 1e-4 ? x - f / r : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo < 1e-14) break;
            x = next;
        }
        q.values[std::size_t(i + n)] = x;
        q.values[std::size_t(n - i)] = -x;
    }
    q.values[std::size_t(2 * n)] = edge;
    q.values[0] = -edge;
    return q;
}

double DensityProfile::table_quantile(double p) const {
    std::vector<double> cum(grid_.size(), 0.0);
    KahanSum s;
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
        s.add(cell_integral(grid_, rho_, k));
        cum[k + 1] = s.value();
    }
    const double target = p * cum.back();
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    if (it == cum.begin()) return grid_.front();
    if (it == cum.end()) return grid_.back();
    const std::size_t k = std::size_t(it - cum.begin());
    const double c0 = cum[k - 1], c1 = cum[k];
    const double t = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    return grid_[k - 1] + t * (grid_[k] - grid_[k - 1]);
}

void DensityProfile::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    out.precision(17);
    out << "e,rho\n";
    for (std::size_t k = 0; k < grid_.size(); ++k) out << grid_[k] << "," << rho_[k] << "\n";
}

std::vector<Interval> kappa_bulk(const Deformation& def, double kappa) {
    return DensityProfile(def).bulk(kappa);
}

QuantileTable quantiles(const Deformation& def, int n) { return DensityProfile(def).quantiles(n); }

bool in_nonhermitian_bulk(const Deformation& def, cd z, double kappa) {
    const int n = def.dim();
    const double k23 = std::pow(kappa, 2.0 / 3.0);
    KahanSum acc;
    const Mat& l = def.entries();
    if (l.isDiagonal(0.0)) {
        // normal case: singular values of L - z are |L_ii - z|
        for (int i = 0; i < n; ++i) acc.add(1.0 / (std::norm(l(i, i) - z) + k23));
    } else {
        SvdResult s = svd(l - z * Mat::Identity(n, n));
        for (int i = 0; i < n; ++i) acc.add(1.0 / (s.s(i) * s.s(i) + k23));
    }
    return acc.value() / n >= 1.0;
}

}  // namespace ethlab
