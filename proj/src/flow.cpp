#include "lsd/flow.hpp"

#include <cmath>
#include <exception>
#include <fstream>

namespace lsd {

namespace {

using State = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim + 1, 1>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Rhs {
    const FlowProblem& prob;
    cplx dir;
    int d;

    State operator()(const State& y) const {
        CPoint k = y.head(d);
        auto fs = field_and_divergence(prob.pair, prob.xi, k);
        State out(d + 1);
        out.head(d) = dir * fs.v;
        out[d] = dir * fs.div;
        return out;
    }
};

// Integrates y' = dir * F(y) over s in [0, span].
void integrate_leg(const FlowProblem& prob, State& y, cplx dir, double span, IntegratorStats& stats) {
    if (span == 0.0) return;
    const int d = int(y.size()) - 1;
    const double tol = prob.tol;
    const double strip = prob.pair.strip_radius();
    Rhs f{prob, dir, d};

    double s = 0.0;
    double h = std::min(span, 0.05);
    State k1 = f(y);
    long steps = 0;
    while (s < span) {
        if (++steps > prob.max_steps) fail(ErrorKind::ToleranceNotMet, "flow integrator exceeded max_steps");
        bool last = false;
        if (s + h >= span) {
            h = span - s;
            last = true;
        }
        State k2 = f(y + h * (a21 * k1));
        State k3 = f(y + h * (a31 * k1 + a32 * k2));
        State k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        State k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        State k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        State yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        State k7 = f(yn);
        State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = 0.0;
        for (int i = 0; i <= d; ++i) {
            double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
            en = std::max(en, std::abs(err[i]) / scale);
        }
        if (!std::isfinite(en)) fail(ErrorKind::NonFinite, "non-finite flow state");

        if (en <= 1.0) {
            s = last ? span : s + h;
            y = yn;
            k1 = k7;
            ++stats.accepted;
            stats.max_error = std::max(stats.max_error, en);
            for (int i = 0; i < d; ++i)
                if (!(std::abs(y[i].imag()) < strip))
                    fail(ErrorKind::StripViolation, "flow left the strip of half-width " + fmt17(strip));
        } else {
            ++stats.rejected;
        }
        double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        if (h < 1e-14 * span) fail(ErrorKind::ToleranceNotMet, "flow step size underflow");
    }
}

State initial_state(const CPoint& k) {
    State y(k.size() + 1);
    y.head(k.size()) = k;
    y[k.size()] = 0.0;
    return y;
}

}  // namespace

double FlowProblem::admissible_radius() const {
    require(bounds.has_value(), ErrorKind::InvalidArgument, "admissible radius needs certified bounds");
    return pair.strip_radius() / (bounds->c_omega + 1.0);
}

RealFlowPoint integrate_real(const FlowProblem& prob, const RPoint& k, double t) {
    require(std::isfinite(t), ErrorKind::InvalidArgument, "flow time must be finite");
    State y = initial_state(to_complex(k));
    RealFlowPoint out;
    integrate_leg(prob, y, t >= 0 ? 1.0 : -1.0, std::abs(t), out.stats);
    const int d = int(k.size());
    out.gamma = y.head(d).real();
    out.jac = std::exp(y[d].real());
    return out;
}

ComplexFlowPoint continue_complex(const FlowProblem& prob, const CPoint& k, cplx theta) {
    require(is_finite(theta), ErrorKind::InvalidArgument, "flow time must be finite");
    if (prob.bounds) {
        double r = prob.admissible_radius();
        if (!(std::abs(theta.imag()) < r))
            fail(ErrorKind::StripViolation, "|Im theta| = " + fmt17(std::abs(theta.imag())) +
                                                " not below admissible radius " + fmt17(r));
    }
    State y = initial_state(k);
    ComplexFlowPoint out;
    integrate_leg(prob, y, theta.real() >= 0 ? 1.0 : -1.0, std::abs(theta.real()), out.stats);
    integrate_leg(prob, y, theta.imag() >= 0 ? cplx(0, 1) : cplx(0, -1), std::abs(theta.imag()), out.stats);
    const int d = int(k.size());
    out.gamma = y.head(d);
    out.log_jac = y[d];
    out.jac = std::exp(y[d]);
    out.jac_arg = y[d].imag();
    return out;
}

ComplexFlowPoint continue_complex(const FlowProblem& prob, const RPoint& k, cplx theta) {
    return continue_complex(prob, to_complex(k), theta);
}

namespace {

FlowTable empty_table(const MomentumGrid& grid, const FlowProblem& prob, cplx theta) {
    grid.validate();
    require(prob.xi.size() == 1 && prob.pair.dim() == 1, ErrorKind::InvalidArgument, "flow tables are one-dimensional");
    FlowTable t;
    t.grid_id = grid.id();
    t.theta = theta;
    t.xi = prob.xi;
    t.nodes = grid.nodes();
    t.gamma.assign(grid.points, CPoint(1));
    t.jac.assign(grid.points, 1.0);
    t.jac_arg.assign(grid.points, 0.0);
    t.log_jac.assign(grid.points, 0.0);
    return t;
}

void fill_node(FlowTable& t, const FlowProblem& prob, int i, IntegratorStats& st) {
    RPoint k(1);
    k[0] = t.nodes[i];
    auto p = continue_complex(prob, k, t.theta);
    t.gamma[i] = p.gamma;
    t.jac[i] = p.jac;
    t.jac_arg[i] = p.jac_arg;
    t.log_jac[i] = p.log_jac;
    st = p.stats;
}

void finalize_table(FlowTable& t, const FlowProblem& prob, std::vector<IntegratorStats>& stats,
                    std::vector<std::exception_ptr>& errors) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            throw Error(e.kind(), "node " + std::to_string(i) + ": " + e.what());
        }
    }
    for (auto& s : stats) t.stats.merge(s);

    const double at = std::abs(t.theta), im = std::abs(t.theta.imag());
    const double slack = 10.0 * prob.tol;
    double max_im = 0, max_disp = 0, max_jm = 0, max_arg = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        max_im = std::max(max_im, max_abs_imag(t.gamma[i]));
        max_disp = std::max(max_disp, std::abs(t.gamma[i][0] - t.nodes[i]));
        max_jm = std::max(max_jm, std::abs(t.jac[i]));
        max_arg = std::max(max_arg, std::abs(t.jac_arg[i]));
    }
    t.margins.max_abs_jac_arg = max_arg;
    if (!prob.bounds) return;
    const auto& b = *prob.bounds;
    const double d = double(prob.pair.dim());
    auto ratio = [](double x, double bound) { return bound > 0 ? x / bound : (x > 0 ? INFINITY : 0.0); };
    t.margins.im_gamma = ratio(max_im, b.c_omega * im + slack);
    t.margins.displacement = ratio(max_disp, b.c_omega * at + slack);
    t.margins.jac_modulus = ratio(max_jm, std::exp(d * b.c_omega_prime * at) * (1 + slack));
    t.margins.jac_arg = ratio(max_arg, d * b.c_omega_prime * im + slack);
    if (t.margins.im_gamma > 1 || t.margins.displacement > 1 || t.margins.jac_modulus > 1 || t.margins.jac_arg > 1)
        fail(ErrorKind::CertificationFailure, "flow table violates certified bounds");
}

}  // namespace

FlowTable build_flow_table(const MomentumGrid& grid, const FlowProblem& prob, cplx theta) {
    FlowTable t = empty_table(grid, prob, theta);
    const int n = grid.points;
    std::vector<IntegratorStats> stats(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
        try {
            fill_node(t, prob, i, stats[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    finalize_table(t, prob, stats, errors);
    return t;
}

FlowTable build_flow_table_serial(const MomentumGrid& grid, const FlowProblem& prob, cplx theta) {
    FlowTable t = empty_table(grid, prob, theta);
    const int n = grid.points;
    std::vector<IntegratorStats> stats(n);
    std::vector<std::exception_ptr> errors(n);
    for (int i = 0; i < n; ++i) {
        try {
            fill_node(t, prob, i, stats[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    finalize_table(t, prob, stats, errors);
    return t;
}

void FlowTable::write_csv(const std::string& path) const {
    std::ofstream os(path);
    require(bool(os), ErrorKind::IoError, "cannot open " + path);
    os << "k,re_gamma,im_gamma,re_J,im_J,arg_J\n";
    for (std::size_t i = 0; i < size(); ++i)
        os << fmt17(nodes[i]) << ',' << fmt17(gamma[i][0].real()) << ',' << fmt17(gamma[i][0].imag()) << ','
           << fmt17(jac[i].real()) << ',' << fmt17(jac[i].imag()) << ',' << fmt17(jac_arg[i]) << '\n';
}

GroupReport check_group_and_inverse(const FlowProblem& prob, const RPoint& k, double t, double s) {
    GroupReport r;
    auto ts = integrate_real(prob, k, t + s);
    auto ss = integrate_real(prob, k, s);
    auto tss = integrate_real(prob, ss.gamma, t);
    r.group_deviation = std::max((ts.gamma - tss.gamma).norm(), std::abs(ts.jac - tss.jac * ss.jac) / ts.jac);

    auto fwd = integrate_real(prob, k, t);
    auto back = integrate_real(prob, fwd.gamma, -t);
    r.inverse_deviation = std::max((back.gamma - k).norm(), std::abs(back.jac * fwd.jac - 1.0));
    return r;
}

double separation_lower_bound(const FieldBounds& bounds, const RPoint& k, const RPoint& kprime, cplx theta) {
    return (k - kprime).norm() * std::exp(-bounds.c_omega_prime * std::abs(theta));
}

}  // namespace lsd
