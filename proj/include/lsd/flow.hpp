#pragma once

#include "lsd/dispersion.hpp"
#include "lsd/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lsd {

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    double max_error = 0.0;  // largest accepted normalized local error estimate

    void merge(const IntegratorStats& o) {
        accepted += o.accepted;
        rejected += o.rejected;
        max_error = std::max(max_error, o.max_error);
    }
};

// Everything the flow of v_xi depends on.
struct FlowProblem {
    DispersionPair pair;
    CPoint xi;
    std::optional<FieldBounds> bounds;  // enables admissibility and invariant checks
    double tol = 1e-12;
    long max_steps = 1000000;

    double admissible_radius() const;  // r = R~/(C_omega + 1), needs bounds
};

struct RealFlowPoint {
    RPoint gamma;
    double jac = 1.0;
    IntegratorStats stats;
};

struct ComplexFlowPoint {
    CPoint gamma;
    cplx jac = 1.0;
    double jac_arg = 0.0;
    cplx log_jac = 0.0;
    IntegratorStats stats;
};

RealFlowPoint integrate_real(const FlowProblem& prob, const RPoint& k, double t);

// L-shaped contour 0 -> Re theta -> theta. The start point may be complex
// (used for composition checks); the strip check applies throughout.
ComplexFlowPoint continue_complex(const FlowProblem& prob, const CPoint& k, cplx theta);
ComplexFlowPoint continue_complex(const FlowProblem& prob, const RPoint& k, cplx theta);

struct FlowMargins {
    // Ratios of observed quantity to its certified bound; <= 1 means the invariant holds.
    double im_gamma = 0.0;
    double displacement = 0.0;
    double jac_modulus = 0.0;
    double jac_arg = 0.0;
    double max_abs_jac_arg = 0.0;
};

struct FlowTable {
    std::string grid_id;
    cplx theta = 0.0;  // flow time
    CPoint xi;
    std::vector<double> nodes;
    std::vector<CPoint> gamma;
    std::vector<cplx> jac;
    std::vector<double> jac_arg;
    std::vector<cplx> log_jac;
    IntegratorStats stats;
    FlowMargins margins;

    std::size_t size() const { return gamma.size(); }
    void write_csv(const std::string& path) const;
};

// OpenMP over nodes.
FlowTable build_flow_table(const MomentumGrid& grid, const FlowProblem& prob, cplx theta);
// Serial reference, identical arithmetic.
FlowTable build_flow_table_serial(const MomentumGrid& grid, const FlowProblem& prob, cplx theta);

struct GroupReport {
    double group_deviation = 0.0;    // |gamma^{t+s} - gamma^t o gamma^s| and J cocycle
    double inverse_deviation = 0.0;  // |J^{-t}(gamma^t) J^t - 1| and return to k
    double max() const { return std::max(group_deviation, inverse_deviation); }
};

GroupReport check_group_and_inverse(const FlowProblem& prob, const RPoint& k, double t, double s);

double separation_lower_bound(const FieldBounds& bounds, const RPoint& k, const RPoint& kprime, cplx theta);

}  // namespace lsd
