#include "lsd/common.hpp"

#include <cstdio>

namespace lsd {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StripViolation: return "StripViolation";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SingularU: return "SingularU";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::BranchFailure: return "BranchFailure";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ContourTooClose: return "ContourTooClose";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::ReducedSingular: return "ReducedSingular";
    case ErrorKind::MatchingAmbiguous: return "MatchingAmbiguous";
    case ErrorKind::ThresholdTooClose: return "ThresholdTooClose";
    case ErrorKind::ThresholdCollision: return "ThresholdCollision";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::RadiusExceeded: return "RadiusExceeded";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::CertificationFailure: return "CertificationFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::MissingStage: return "MissingStage";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace lsd
