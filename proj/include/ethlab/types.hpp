#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ethlab {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cd I_UNIT{0.0, 1.0};

enum class ErrorCode {
    NoConvergence,
    SingularDenominator,
    EmptyBulk,
    UnstableDenominator,
    SingularStability,
    DegenerateSpectrum,
    TrackingLoss,
    InsufficientTrials,
    QuadratureFailure,
    ConfigError,
    NoReports,
    InvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ethlab
