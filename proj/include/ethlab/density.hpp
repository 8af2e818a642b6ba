#pragma once

#include <string>
#include <vector>

#include "ethlab/deformation.hpp"

namespace ethlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// Quantiles gamma_i for i = -N..N, gamma_0 = 0.
struct QuantileTable {
    int n = 0;
    std::vector<double> values;
    double at(int i) const { return values[std::size_t(i + n)]; }
};

// Density tabulated on [-|L|-3, |L|+3].
class DensityProfile {
public:
    explicit DensityProfile(const Deformation& def);

    const Deformation& deformation() const { return def_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& rho() const { return rho_; }
    double box_lo() const { return box_lo_; }
    double box_hi() const { return box_hi_; }

    // Integral of rho over the box, with square-root modelling at support edges.
    double mass() const;
    // Exact cumulative distribution through a contour representation.
    double cdf(double x) const;
    std::vector<Interval> bulk(double kappa) const;
    // Largest point of the support.
    double support_edge() const;
    QuantileTable quantiles(int n) const;
    // Inverse of the tabulated cumulative integral (no refinement); used as an
    // independent cross-check of quantiles().
    double table_quantile(double p) const;
    void write_csv(const std::string& path) const;

private:
    double rho_at(double e) const;
    Deformation def_;
    double box_lo_, box_hi_;
    std::vector<double> grid_, rho_;
};

std::vector<Interval> kappa_bulk(const Deformation& def, double kappa);
QuantileTable quantiles(const Deformation& def, int n);

// Bulk test for a non-Hermitian eigenvalue z: (1/N) sum 1/(nu_i(L - z)^2 + kappa^{2/3}) >= 1.
bool in_nonhermitian_bulk(const Deformation& def, cd z, double kappa);

}  // namespace ethlab
