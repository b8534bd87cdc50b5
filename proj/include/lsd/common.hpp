#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace lsd {

using cplx = std::complex<double>;

// Small fixed-capacity vectors for points in C^d, d <= 3.
constexpr int kMaxDim = 3;
using CPoint = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RPoint = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using CSmallMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class ErrorKind {
    InvalidArgument,
    StripViolation,
    ToleranceNotMet,
    NonFinite,
    QuadratureFailure,
    SingularU,
    GridTooCoarse,
    BranchFailure,
    ConvergenceFailure,
    ContourTooClose,
    SolveFailure,
    ReducedSingular,
    MatchingAmbiguous,
    ThresholdTooClose,
    ThresholdCollision,
    InsufficientPoints,
    RadiusExceeded,
    NotApplicable,
    CertificationFailure,
    ConfigError,
    MissingStage,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Analytic square sum_i z_i^2 (no conjugation).
inline cplx analytic_square(const CPoint& z) {
    cplx s = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += z[i] * z[i];
    return s;
}

inline double max_abs_imag(const CPoint& z) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) m = std::max(m, std::abs(z[i].imag()));
    return m;
}

inline CPoint to_complex(const RPoint& x) { return x.cast<cplx>(); }

// 17 significant digits, round-trips doubles exactly.
std::string fmt17(double x);

}  // namespace lsd
