#pragma once

#include <vector>

namespace ethlab {

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation
    double max = 0.0;
    double min = 0.0;
    double median = 0.0;
    int count = 0;
    double stderr_mean() const;
};
Summary summarize(const std::vector<double>& v);

// Compensated mean.
double mean(const std::vector<double>& v);
double median(std::vector<double> v);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    int points = 0;
};
// Least squares y = a + b x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Least squares in log-log coordinates; any non-positive entry gives a NaN fit.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Fraction of entries <= bound.
double fraction_within(const std::vector<double>& v, double bound);

// Compares the means of the first and second half; true when they agree
// within k combined standard errors.
bool halves_agree(const std::vector<double>& v, double k = 3.0);

}  // namespace ethlab
