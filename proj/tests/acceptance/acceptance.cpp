// Acceptance gate: runs the ten primary criteria at their stated tolerances and runtime budgets.
// One PASS/FAIL line per criterion; exit status 0 only when all pass.

#include "lsd/commlab.hpp"
#include "lsd/pipeline.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace lsd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string scenario_path(const std::string& name) { return std::string(LSD_SOURCE_DIR) + "/scenarios/" + name + ".json"; }

std::string sci(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

SpectrumReport classified(const Pipeline& p, const FiberOperator& op) {
    SpectrumReport r = eigendecompose(op, p.scenario().tol.eig_tol);
    ClassifierOptions co;
    co.match_tol = p.scenario().tol.match_tol;
    classify(r, op, co);
    return r;
}

// 1. Truncated commutator series against Pade conjugation on 50 seeded pairs.
Outcome commutator_series() {
    double worst = 0.0, worst_tail = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const MatrixPair p = random_pair(40, seed);
        const CommutatorLadder lad = ladder(p, 60);
        const cplx theta(0.0, 0.9 * lad.radius());
        const SeriesResult s = conjugate_series(lad, theta, 60);
        const MatrixXcd ref = oracle::pade_conjugation(p.H, p.A, theta);
        worst = std::max(worst, (s.matrix - ref).norm() / ref.norm());
        worst_tail = std::max(worst_tail, s.truncation_bound);
    }
    return {worst <= 1e-10, "max relative deviation " + sci(worst) + ", truncation bound " + sci(worst_tail)};
}

// 2. matrix^H(theta) = matrix(conj theta) on the reference scenario.
Outcome adjoint_identity() {
    Pipeline p(load_scenario(scenario_path("reference")));
    double worst = 0.0;
    for (cplx theta : p.scenario().theta) {
        const FiberOperator a = p.assemble(0.0, theta);
        const FiberOperator b = p.assemble(0.0, std::conj(theta));
        worst = std::max(worst, (a.matrix.adjoint() - b.matrix).cwiseAbs().maxCoeff() / a.norm_estimate);
    }
    return {worst <= 1e-13, "max |H^H(theta) - H(conj theta)| / ||H|| = " + sci(worst) + " at N = 801"};
}

// 3. Sector bound with C; C/100 must produce violations.
Outcome sector_bound() {
    Pipeline p(load_scenario(scenario_path("reference")));
    const double C = p.constants(true).C;
    std::size_t violations = 0, control = 0;
    for (cplx theta : p.scenario().theta) {
        const SpectrumReport r = eigendecompose(p.assemble(0.0, theta), p.scenario().tol.eig_tol);
        violations += sector_check(r, C, theta).violations;
        control += sector_check(r, C / 100.0, theta).violations;
    }
    return {violations == 0 && control > 0,
            "C = " + sci(C) + ", violations " + std::to_string(violations) + ", C/100 control violations " +
                std::to_string(control)};
}

// 4. Strays in the Mourre rectangle vanish along N = 201, 401, 801; the embedded value persists.
Outcome essential_clearing() {
    std::vector<std::size_t> strays;
    bool persists = true;
    std::ostringstream os;
    for (int N : {201, 401, 801}) {
        Pipeline p(load_scenario(scenario_path("embedded"), {"grid.N=" + std::to_string(N)}));
        const cplx theta = p.scenario().theta.back();
        const double target = p.embedded()->target;
        const Rectangle rect = p.rectangle(0.0);
        const FiberOperator op = p.assemble(0.0, theta);
        SpectrumReport r = classified(p, op);
        const RectangleStats st = rectangle_scan(r, rect, {cplx(target)}, 1e-3);
        strays.push_back(st.stray_count());
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < r.eigenvalues.size(); ++i)
            if (std::abs(r.eigenvalues[i] - target) < std::abs(r.eigenvalues[best] - target)) best = i;
        const cplx l = r.eigenvalues[best];
        const bool ok = rect.contains(l, theta) && std::abs(l.imag()) <= 1e-6 && std::abs(l.real() - 1.0) <= 1e-3;
        persists = persists && ok;
        os << "N=" << N << ": strays " << st.stray_count() << ", lambda " << l.real() << (l.imag() < 0 ? "" : "+")
           << sci(l.imag()) << "i; ";
        if (N == 201) os << "rect rho " << rect.half_width << " sigma " << rect.depth_slope << "; ";
    }
    const bool monotone = strays[0] >= strays[1] && strays[1] >= strays[2] && strays[2] == 0;
    return {monotone && persists, os.str()};
}

// 5. Embedded eigenvalue drift across theta against continuum motion.
Outcome theta_independence_check() {
    Pipeline p(load_scenario(scenario_path("embedded")));
    const Rectangle rect = p.rectangle(0.0);
    std::vector<SpectrumReport> reports;
    for (cplx theta : p.scenario().theta) reports.push_back(classified(p, p.assemble(0.0, theta)));
    std::vector<const SpectrumReport*> ptrs;
    for (const auto& r : reports) ptrs.push_back(&r);
    const DriftTable dt = theta_independence(ptrs, rect, 1e-3, rect.half_width);
    bool tracked = !dt.rows.empty();
    for (const auto& row : dt.rows) tracked = tracked && row.isolated_tracked > 0;
    const double drift = dt.max_isolated_drift(), cont = dt.min_median_continuum_drift();
    return {tracked && drift <= 1e-5 && cont > 1e-3,
            "isolated drift " + sci(drift) + ", median continuum drift " + sci(cont)};
}

// 6. Riesz projection and Feshbach determinant at the in-rectangle eigenvalue.
Outcome feshbach() {
    Pipeline p(load_scenario(scenario_path("embedded")));
    const auto& s = p.scenario();
    const cplx theta = s.theta.front();
    const FiberOperator op = p.assemble(0.0, theta);
    const SpectrumReport r = classified(p, op);
    const auto mu = isolated_in_rectangle(r, p.rectangle(0.0));
    if (!mu) return {false, "no isolated eigenvalue in the rectangle"};
    const FeshbachAnalysis fa =
        feshbach_analysis(op.matrix, *mu, s.feshbach.contour_radius, s.feshbach.nodes, s.feshbach.probe_offset);
    const bool pass = fa.abs_det_at_mu <= 1e-8 && fa.min_probe() >= 1e-3 && fa.rank == 1 &&
                      fa.idempotency_defect <= 1e-8 && fa.rank_stable();
    return {pass, "|det F(mu)| " + sci(fa.abs_det_at_mu) + ", min probe " + sci(fa.min_probe()) + ", rank " +
                      std::to_string(fa.rank) + ", idempotency " + sci(fa.idempotency_defect) + ", stable " +
                      (fa.rank_stable() ? "yes" : "no") + ", winding " + std::to_string(fa.winding_number)};
}

// 7. Flow identities on 1000 random nodes.
Outcome flow_identities() {
    Pipeline p(load_scenario(scenario_path("reference")));
    const FlowProblem prob = p.flow_problem(0.0);
    const double c_omega = prob.bounds->c_omega;
    const double r = prob.admissible_radius();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double group = 0.0, inverse = 0.0, speed = 0.0, strip = 0.0, variational = 0.0;
    auto v = [&](cplx y) { return vector_field(prob.pair, prob.xi, CPoint::Constant(1, y))[0]; };
    for (int n = 0; n < 1000; ++n) {
        const double k = u(rng), t = u(rng), s = u(rng);
        const GroupReport g = check_group_and_inverse(prob, RPoint::Constant(1, k), t, s);
        group = std::max(group, g.group_deviation);
        inverse = std::max(inverse, g.inverse_deviation);

        const double kk = p.scenario().K * u(rng);
        const cplx theta(0.1 * u(rng), std::min(0.1, 0.9 * r) * u(rng));
        const ComplexFlowPoint c = continue_complex(prob, RPoint(RPoint::Constant(1, kk)), theta);
        speed = std::max(speed, std::abs(c.gamma[0] - kk) / (c_omega * std::abs(theta)));
        strip = std::max(strip, std::abs(c.gamma[0].imag()) / (c_omega * std::abs(theta.imag())));
        const oracle::Variational o = oracle::variational_rk4(v, kk, theta, 2000);
        variational = std::max(variational, std::abs(c.jac - o.det) / std::abs(o.det));
    }
    const bool pass = group <= 1e-9 && inverse <= 1e-9 && speed <= 1.0 && strip <= 1.0 + 1e-9 && variational <= 1e-6;
    return {pass, "group " + sci(group) + ", J-inverse " + sci(inverse) + ", speed ratio " + sci(speed) +
                      ", strip ratio " + sci(strip) + ", variational rel " + sci(variational)};
}

// 8. Threshold sets for the reference family and the double well.
Outcome thresholds() {
    Pipeline p(load_scenario(scenario_path("thresholds_reference")));
    double worst = 0.0;
    std::size_t points = 0;
    bool single = true;
    for (double xi : p.xi_values()) {
        const ThresholdSet t = p.thresholds(xi);
        single = single && t.critical_values.size() == 1;
        for (double v : t.critical_values) worst = std::max(worst, std::abs(v - xi * xi / 2.0));
        ++points;
    }
    Pipeline dw(load_scenario(scenario_path("double_well")));
    const ThresholdSet t = dw.thresholds(0.0);
    const bool well = t.critical_values.size() == 2 && std::abs(t.critical_values[0] + 1.0) <= 1e-10 &&
                      std::abs(t.critical_values[1]) <= 1e-10;
    std::ostringstream os;
    os << points << " xi points, max |T - xi^2/2| " << sci(worst) << "; double well {";
    for (std::size_t i = 0; i < t.critical_values.size(); ++i) os << (i ? ", " : "") << t.critical_values[i];
    os << "}";
    return {points == 101 && single && worst <= 1e-10 && well, os.str()};
}

// 9. Mourre constants, inequality margin and the first-order finite-difference commutator.
Outcome mourre() {
    Pipeline p(load_scenario(scenario_path("reference")));
    const CPoint x = CPoint::Constant(1, 0.0);
    const CommutatorMatrix com = assemble_commutator(p.grid(), p.pair(), p.potential(), x, x);
    MourreOptions mo;
    mo.shell_step = p.scenario().mourre.shell_step;
    const MourreReport rep =
        extract_constants(p.grid(), p.pair(), p.potential(), 1.0, x, p.thresholds(0.0).critical_values, mo, &com);
    const FiberOperator h0 = p.assemble(0.0, 0.0);
    const MourreMargin mm = mourre_inequality_check(com, h0.matrix, rep);
    auto fd = [&](double h) { return ((h0.matrix - p.assemble(0.0, cplx(h, 0.0)).matrix) / h - com.matrix).cwiseAbs().maxCoeff(); };
    const double e1 = fd(1e-3), e2 = fd(5e-4), e3 = fd(2.5e-4);
    const double q1 = e1 / e2, q2 = e2 / e3;
    const bool first_order = std::abs(q1 - 2.0) <= 0.1 && std::abs(q2 - 2.0) <= 0.1;
    return {rep.e > 0.0 && mm.margin >= -1e-8 && first_order,
            "e " + sci(rep.e) + ", margin " + sci(mm.margin) + ", FD error ratios " + sci(q1) + " " + sci(q2)};
}

// 10. Embedded-eigenvalue band over xi0 in [0.5, 1.5].
Outcome embedded_band() {
    Pipeline p(load_scenario(scenario_path("embedded_band")));
    const auto& s = p.scenario();
    const BandData band = band_sweep(p.band_factory(), s.sweep.values(), p.rectangle(s.xi.front()), p.band_options());
    if (band.branches.size() != 1) return {false, std::to_string(band.branches.size()) + " branches"};
    const Branch& b = band.branches[0];
    double worst = 0.0;
    bool mult = true;
    for (const auto& smp : b.samples) {
        worst = std::max(worst, std::abs(smp.lambda - smp.xi * smp.xi));
        mult = mult && smp.multiplicity == 1;
    }
    const FitReport fit = branch_regularity(band, b.id, 2);
    const double res = fit.residuals.at(2);
    return {b.samples.size() == 21 && band.gaps.empty() && worst <= 1e-4 && mult && res <= 1e-6,
            std::to_string(b.samples.size()) + " samples, max |lambda - xi0^2| " + sci(worst) + ", multiplicity 1 " +
                (mult ? "throughout" : "broken") + ", degree-2 residual " + sci(res)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "commutator_series", 60, commutator_series},
        {2, "adjoint_identity", 60, adjoint_identity},
        {3, "sector_bound", 300, sector_bound},
        {4, "essential_spectrum_clearing", 600, essential_clearing},
        {5, "theta_independence", 600, theta_independence_check},
        {6, "feshbach_isospectrality", 120, feshbach},
        {7, "flow_identities", 60, flow_identities},
        {8, "threshold_set", 60, thresholds},
        {9, "mourre_constants", 120, mourre},
        {10, "embedded_band", 900, embedded_band},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.1f s of %.0f s", secs, c.budget_s);
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " (" << timing
                  << (in_time ? "" : ", over budget") << ")" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
