#include "ethlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ethlab/linalg.hpp"

namespace ethlab {

double Summary::stderr_mean() const { return count > 1 ? std / std::sqrt(double(count)) : 0.0; }

double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value() / double(v.size());
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Summary summarize(const std::vector<double>& v) {
    Summary s;
    s.count = int(v.size());
    if (v.empty()) return s;
    s.mean = mean(v);
    KahanSum sq;
    for (double x : v) sq.add((x - s.mean) * (x - s.mean));
    s.std = v.size() > 1 ? std::sqrt(sq.value() / double(v.size() - 1)) : 0.0;
    s.max = *std::max_element(v.begin(), v.end());
    s.min = *std::min_element(v.begin(), v.end());
    s.median = median(v);
    return s;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.points = int(x.size());
    if (x.size() != y.size() || x.size() < 2) {
        f.slope = f.intercept = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    const double mx = mean(x), my = mean(y);
    KahanSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
    }
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        KahanSum rss;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss.add(r * r);
        }
        f.slope_stderr = std::sqrt(rss.value() / double(x.size() - 2) / sxx.value());
    }
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) {
            LineFit bad;
            bad.slope = bad.intercept = std::numeric_limits<double>::quiet_NaN();
            bad.points = int(x.size());
            return bad;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

double fraction_within(const std::vector<double>& v, double bound) {
    if (v.empty()) return 0.0;
    std::size_t k = 0;
    for (double x : v) k += x <= bound;
    return double(k) / double(v.size());
}

bool halves_agree(const std::vector<double>& v, double k) {
    if (v.size() < 4) return true;
    const std::size_t h = v.size() / 2;
    const Summary a = summarize(std::vector<double>(v.begin(), v.begin() + h));
    const Summary b = summarize(std::vector<double>(v.begin() + h, v.end()));
    const double se = std::hypot(a.stderr_mean(), b.stderr_mean());
    return std::abs(a.mean - b.mean) <= k * se || (se == 0.0 && a.mean == b.mean);
}

}  // namespace ethlab
