#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ethlab/types.hpp"

namespace ethlab {

// Fixed deterministic N x N deformation with its cached SVD.
// Copies share the factorisation.
class Deformation {
public:
    explicit Deformation(const Mat& lambda, std::string label = "full");

    static Deformation zero(int n);
    static Deformation shift(int n, cd z);  // Lambda = -z I
    static Deformation diagonal(const RVec& d, std::string label = "diag");
    // Uniform diagonal entries in [-scale, scale], reproducible from seed.
    static Deformation random_diagonal(int n, double scale, std::uint64_t seed);
    // "zero", "shift:<re>,<im>", "diag:<file>", "full:<file>", "randdiag:<scale>,<seed>".
    static Deformation from_spec(const std::string& spec, int n);

    int dim() const { return n_; }
    const Mat& entries() const { return data_->lambda; }
    const Mat& u() const { return data_->u; }
    const Mat& v() const { return data_->v; }
    const RVec& nu() const { return data_->nu; }  // ascending
    double norm() const { return data_->nu.size() ? data_->nu(n_ - 1) : 0.0; }
    double svd_error() const { return data_->svd_error; }
    const std::string& label() const { return label_; }

    // Distinct singular values and their multiplicity / N.
    const std::vector<double>& levels() const { return data_->levels; }
    const std::vector<double>& weights() const { return data_->weights; }

    // Hermitised deformation [[0, L], [L^*, 0]].
    Mat hat() const;

private:
    struct Data {
        Mat lambda, u, v;
        RVec nu;
        std::vector<double> levels, weights;
        double svd_error = 0.0;
    };
    int n_ = 0;
    std::string label_;
    std::shared_ptr<const Data> data_;
};

}  // namespace ethlab
