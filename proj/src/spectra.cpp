#include "lsd/spectra.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace lsd {

const char* to_string(SpectralClass c) {
    switch (c) {
    case SpectralClass::ContinuumArc: return "continuum-arc";
    case SpectralClass::IsolatedReal: return "isolated-real";
    case SpectralClass::Resonance: return "resonance";
    case SpectralClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

Rectangle::Rectangle(double c, double rho, double sigma) : center(c), half_width(rho), depth_slope(sigma) {
    require(std::isfinite(c), ErrorKind::InvalidArgument, "rectangle center must be finite");
    require(rho > 0.0 && std::isfinite(rho), ErrorKind::InvalidArgument, "rectangle half-width must be positive");
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "rectangle depth slope must be positive");
}

bool Rectangle::contains(cplx z, cplx theta) const {
    return std::abs(z.real() - center) < half_width && z.imag() > -depth_slope * theta.imag();
}

std::size_t SpectrumReport::flagged_count() const { return std::size_t(std::count(flagged.begin(), flagged.end(), true)); }

std::size_t SpectrumReport::count(SpectralClass c) const {
    return std::size_t(std::count(classes.begin(), classes.end(), c));
}

std::string SpectrumReport::file_stem() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "spectrum_xi%g_theta%g%+gi_N%d_K%g", xi.size() ? xi[0].real() : 0.0, theta.real(),
                  theta.imag(), grid.points, grid.cutoff);
    return buf;
}

void SpectrumReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    require(bool(os), ErrorKind::IoError, "cannot open " + path);
    os << "re,im,residual,class\n";
    for (std::size_t i = 0; i < size(); ++i)
        os << fmt17(eigenvalues[i].real()) << ',' << fmt17(eigenvalues[i].imag()) << ',' << fmt17(residuals[i]) << ','
           << (classes.empty() ? "unclassified" : to_string(classes[i])) << '\n';
}

nlohmann::json SpectrumReport::summary() const {
    nlohmann::json j;
    j["theta"] = {theta.real(), theta.imag()};
    j["xi"] = xi.size() ? xi[0].real() : 0.0;
    j["N"] = grid.points;
    j["K"] = grid.cutoff;
    j["count"] = size();
    j["flagged"] = flagged_count();
    j["eig_tol"] = eig_tol;
    j["max_residual"] = residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
    j["norm_estimate"] = norm_estimate;
    nlohmann::json cls;
    for (auto c : {SpectralClass::ContinuumArc, SpectralClass::IsolatedReal, SpectralClass::Resonance,
                   SpectralClass::Unclassified})
        cls[to_string(c)] = count(c);
    j["classes"] = cls;
    if (rectangle_stats) {
        j["rectangle"] = {{"inside", rectangle_stats->inside.size()},
                          {"matched", rectangle_stats->matched.size()},
                          {"strays", rectangle_stats->stray_count()}};
    }
    return j;
}

SpectrumReport eigendecompose(const FiberOperator& op, double eig_tol, bool keep_vectors) {
    const Eigen::Index n = op.size();
    require(n > 0 && n <= 4096, ErrorKind::InvalidArgument, "dense eigensolver limited to N <= 4096");
    SpectrumReport r;
    r.theta = op.theta;
    r.xi = op.xi;
    r.grid = op.grid;
    r.eig_tol = eig_tol;
    r.norm_estimate = op.norm_estimate > 0 ? op.norm_estimate : max_row_sum(op.matrix);

    MatrixXcd vecs;
    const bool diagonal = op.matrix.isDiagonal(0.0);
    if (diagonal) {
        // exact: no rescaling or rotation for a multiplication operator
        r.eigenvalues = op.matrix.diagonal();
        vecs = MatrixXcd::Identity(n, n);
    } else if (op.theta == 0.0 && hermitian_defect(op.matrix) <= 1e-13 * r.norm_estimate) {
        auto h = eig_hermitian(op.matrix, true);
        r.eigenvalues = h.values.cast<cplx>();
        vecs = std::move(h.vectors);
    } else {
        auto g = eig_general(op.matrix, true);
        r.eigenvalues = std::move(g.values);
        vecs = std::move(g.vectors);
    }
    MatrixXcd res = op.matrix * vecs - vecs * r.eigenvalues.asDiagonal();
    r.residuals.resize(n);
    r.flagged.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.residuals[i] = res.col(i).norm() / (r.norm_estimate * vecs.col(i).norm());
        r.flagged[i] = !(r.residuals[i] <= eig_tol);
    }
    if (keep_vectors) r.vectors = std::move(vecs);
    return r;
}

double distance_to_polyline(cplx z, const VectorXcd& curve, double* segment_length, cplx* nearest) {
    double best = INFINITY, seg = 0.0;
    cplx near = curve.size() ? curve[0] : cplx(0.0);
    if (curve.size() == 1) best = std::abs(z - curve[0]);
    for (Eigen::Index i = 0; i + 1 < curve.size(); ++i) {
        const cplx a = curve[i], d = curve[i + 1] - a;
        const double len2 = std::norm(d);
        double t = len2 > 0 ? std::clamp(((z - a) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
        const cplx p = a + t * d;
        const double dist = std::abs(z - p);
        if (dist < best) {
            best = dist;
            seg = std::sqrt(len2);
            near = p;
        }
    }
    if (segment_length) *segment_length = seg;
    if (nearest) *nearest = near;
    return best;
}

void classify(SpectrumReport& report, const FiberOperator& op, const ClassifierOptions& opt, const SpectrumReport* refined) {
    const std::size_t n = report.size();
    report.classes.assign(n, SpectralClass::Unclassified);
    report.curve_distance.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx z = report.eigenvalues[i];
        double seg = 0.0;
        cplx near;
        const double dc = distance_to_polyline(z, op.multiplication, &seg, &near);
        report.curve_distance[i] = dc;
        const double arc_tol = std::max({opt.arc_abs, opt.arc_rel * std::abs(near.imag()), opt.arc_segment * seg});
        bool arc = dc <= arc_tol;
        if (refined) {
            double disp = INFINITY;
            for (std::size_t j = 0; j < refined->size(); ++j) disp = std::min(disp, std::abs(refined->eigenvalues[j] - z));
            bool stable = disp <= opt.refine_tol * (1.0 + std::abs(z));
            arc = !stable;
        }
        if (arc)
            report.classes[i] = SpectralClass::ContinuumArc;
        else if (std::abs(z.imag()) <= opt.imag_tol)
            report.classes[i] = SpectralClass::IsolatedReal;
        else if (z.imag() < 0.0)
            report.classes[i] = SpectralClass::Resonance;
    }
    // soundness: isolated values must keep clear of continuum-arc values
    for (std::size_t i = 0; i < n; ++i) {
        if (report.classes[i] != SpectralClass::IsolatedReal) continue;
        const double lim = 5.0 * opt.match_tol * (1.0 + std::abs(report.eigenvalues[i]));
        for (std::size_t j = 0; j < n; ++j)
            if (report.classes[j] == SpectralClass::ContinuumArc &&
                std::abs(report.eigenvalues[j] - report.eigenvalues[i]) < lim) {
                report.classes[i] = SpectralClass::Unclassified;
                break;
            }
    }
}

SectorReport sector_check(const SpectrumReport& report, double C, cplx theta, double slack) {
    SectorReport s;
    s.worst_margin = INFINITY;
    const double at = std::abs(theta);
    for (std::size_t i = 0; i < report.size(); ++i) {
        const cplx z = report.eigenvalues[i];
        const double margin = 4.0 * C * at * (std::abs(z.real()) + 1.0) + slack - std::abs(z.imag());
        s.worst_margin = std::min(s.worst_margin, margin);
        if (margin < 0.0) {
            ++s.violations;
            s.violators.push_back(int(i));
        }
    }
    return s;
}

RectangleStats rectangle_scan(const SpectrumReport& report, const Rectangle& rect, const std::vector<cplx>& exclude,
                              double match_tol) {
    RectangleStats st;
    for (std::size_t i = 0; i < report.size(); ++i) {
        const cplx z = report.eigenvalues[i];
        if (!rect.contains(z, report.theta)) continue;
        st.inside.push_back(int(i));
        bool m = false;
        for (cplx e : exclude) m = m || std::abs(z - e) <= match_tol;
        (m ? st.matched : st.strays).push_back(int(i));
    }
    return st;
}

double DriftTable::max_isolated_drift() const {
    double m = 0.0;
    for (auto& r : rows) m = std::max(m, r.max_isolated_drift);
    return m;
}

double DriftTable::min_median_continuum_drift() const {
    double m = INFINITY;
    for (auto& r : rows) m = std::min(m, r.median_continuum_drift);
    return rows.empty() ? 0.0 : m;
}

std::optional<cplx> isolated_in_rectangle(const SpectrumReport& r, const Rectangle& rect) {
    std::optional<cplx> best;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const cplx l = r.eigenvalues[i];
        if (r.classes[i] != SpectralClass::IsolatedReal || !rect.contains(l, r.theta)) continue;
        if (!best || std::abs(l - rect.center) < std::abs(*best - rect.center)) best = l;
    }
    return best;
}

DriftTable theta_independence(const std::vector<const SpectrumReport*>& reports, const Rectangle& rect, double match_tol,
                              double continuum_window) {
    DriftTable table;
    for (std::size_t p = 0; p + 1 < reports.size(); ++p) {
        const SpectrumReport& a = *reports[p];
        const SpectrumReport& b = *reports[p + 1];
        require(a.classes.size() == a.size() && b.classes.size() == b.size(), ErrorKind::InvalidArgument,
                "theta_independence needs classified reports");
        DriftRow row;
        row.theta_from = a.theta;
        row.theta_to = b.theta;

        std::vector<int> cand;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (b.classes[j] == SpectralClass::IsolatedReal && rect.contains(b.eigenvalues[j], b.theta)) cand.push_back(int(j));
        std::vector<bool> used(b.size(), false);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.classes[i] != SpectralClass::IsolatedReal || !rect.contains(a.eigenvalues[i], a.theta)) continue;
            const cplx z = a.eigenvalues[i];
            int best = -1, within = 0;
            double bd = INFINITY;
            for (int j : cand) {
                if (used[j]) continue;
                double d = std::abs(b.eigenvalues[j] - z);
                if (d <= match_tol) ++within;
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (within > 1) fail(ErrorKind::MatchingAmbiguous, "two candidates within match_tol of " + fmt17(z.real()));
            if (best < 0) {
                // no isolated partner: fall back to the whole next spectrum
                for (std::size_t j = 0; j < b.size(); ++j) bd = std::min(bd, std::abs(b.eigenvalues[j] - z));
            } else {
                used[best] = true;
            }
            row.max_isolated_drift = std::max(row.max_isolated_drift, bd);
            ++row.isolated_tracked;
        }

        std::vector<double> drifts;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.classes[i] != SpectralClass::ContinuumArc) continue;
            const cplx z = a.eigenvalues[i];
            if (std::abs(z.real() - rect.center) > continuum_window) continue;
            double bd = INFINITY;
            for (std::size_t j = 0; j < b.size(); ++j)
                if (b.classes[j] == SpectralClass::ContinuumArc) bd = std::min(bd, std::abs(b.eigenvalues[j] - z));
            if (std::isfinite(bd)) drifts.push_back(bd);
        }
        row.continuum_tracked = drifts.size();
        if (!drifts.empty()) {
            std::sort(drifts.begin(), drifts.end());
            const std::size_t m = drifts.size();
            row.median_continuum_drift = m % 2 ? drifts[m / 2] : 0.5 * (drifts[m / 2 - 1] + drifts[m / 2]);
        }
        table.rows.push_back(row);
    }
    return table;
}

namespace {

void check_contour(const MatrixXcd& H, cplx center, double radius, int nodes, const VectorXcd* known) {
    require(radius > 0.0 && nodes >= 4, ErrorKind::InvalidArgument, "contour needs radius > 0 and >= 4 nodes");
    VectorXcd ev;
    if (known == nullptr) {
        ev = eig_general(H, false).values;
        known = &ev;
    }
    for (Eigen::Index i = 0; i < known->size(); ++i) {
        const double gap = std::abs(std::abs((*known)[i] - center) - radius);
        if (gap < 0.1 * radius)
            fail(ErrorKind::ContourTooClose, "eigenvalue within 0.1 radius of the contour: " + fmt17((*known)[i].real()) +
                                                 (std::signbit((*known)[i].imag()) ? "" : "+") + fmt17((*known)[i].imag()) + "i");
    }
}

cplx node_point(cplx center, double radius, int nodes, int m, cplx* weight) {
    const cplx e = std::polar(1.0, 2.0 * M_PI * m / nodes);
    *weight = radius / nodes * e;
    return center + radius * e;
}

RieszProjection finish_projection(MatrixXcd P, cplx center, double radius, int nodes) {
    RieszProjection rp;
    rp.center = center;
    rp.radius = radius;
    rp.nodes = nodes;
    rp.idempotency_defect = (P * P - P).norm();
    rp.rank = projection_rank(P);
    rp.P = std::move(P);
    return rp;
}

}  // namespace

int projection_rank(const MatrixXcd& P) {
    MatrixXcd Q = orthonormal_range(P, 1e-8);
    if (Q.cols() == 0) return 0;
    MatrixXcd B = Q.adjoint() * P * Q;
    auto ev = eig_general(B, false).values;
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) r += std::abs(ev[i] - 1.0) <= 1e-6;
    return r;
}

RieszProjection riesz_projection(const SchurForm& schur, cplx center, double radius, int nodes) {
    const VectorXcd ev = schur.values();
    check_contour(schur.T, center, radius, nodes, &ev);
    const Eigen::Index n = schur.T.rows();
    MatrixXcd S = MatrixXcd::Zero(n, n);
    const int batch = std::max(1, omp_get_max_threads());
    std::vector<MatrixXcd> buf(batch);
    std::vector<std::exception_ptr> errors(batch);
    for (int start = 0; start < nodes; start += batch) {
        const int count = std::min(batch, nodes - start);
#pragma omp parallel for schedule(static)
        for (int b = 0; b < count; ++b) {
            try {
                cplx w;
                cplx z = node_point(center, radius, nodes, start + b, &w);
                buf[b] = -w * schur.shifted_inverse(z);  // (z - T)^{-1} = -(T - z)^{-1}
            } catch (...) {
                errors[b] = std::current_exception();
            }
        }
        for (int b = 0; b < count; ++b) {
            if (errors[b]) std::rethrow_exception(errors[b]);
            S += buf[b];  // summed in node order, matching the serial reference
        }
    }
    return finish_projection(schur.U * S * schur.U.adjoint(), center, radius, nodes);
}

RieszProjection riesz_projection(const FiberOperator& op, cplx center, double radius, int nodes, const VectorXcd* known) {
    check_contour(op.matrix, center, radius, nodes, known);
    return riesz_projection(schur_form(op.matrix), center, radius, nodes);
}

RieszProjection riesz_projection_serial(const SchurForm& schur, cplx center, double radius, int nodes) {
    const VectorXcd ev = schur.values();
    check_contour(schur.T, center, radius, nodes, &ev);
    MatrixXcd S = MatrixXcd::Zero(schur.T.rows(), schur.T.cols());
    for (int m = 0; m < nodes; ++m) {
        cplx w;
        cplx z = node_point(center, radius, nodes, m, &w);
        S -= w * schur.shifted_inverse(z);
    }
    return finish_projection(schur.U * S * schur.U.adjoint(), center, radius, nodes);
}

RieszProjection riesz_projection_serial(const FiberOperator& op, cplx center, double radius, int nodes,
                                        const VectorXcd* known) {
    check_contour(op.matrix, center, radius, nodes, known);
    return riesz_projection_serial(schur_form(op.matrix), center, radius, nodes);
}

MatrixXcd riesz_apply(const SchurForm& schur, cplx center, double radius, int nodes, const MatrixXcd& block) {
    require(radius > 0.0 && nodes >= 4, ErrorKind::InvalidArgument, "contour needs radius > 0 and >= 4 nodes");
    const Eigen::Index n = schur.T.rows();
    MatrixXcd y = schur.U.adjoint() * block;
    MatrixXcd acc = MatrixXcd::Zero(y.rows(), y.cols());
    for (int m = 0; m < nodes; ++m) {
        cplx w;
        cplx z = node_point(center, radius, nodes, m, &w);
        MatrixXcd t = schur.T;
        t.diagonal().array() -= z;
        for (Eigen::Index i = 0; i < n; ++i)
            if (t(i, i) == cplx(0.0)) fail(ErrorKind::SolveFailure, "contour node hits an eigenvalue");
        MatrixXcd x = y;
        t.triangularView<Eigen::Upper>().solveInPlace(x);
        if (!x.allFinite()) fail(ErrorKind::SolveFailure, "contour solve produced non-finite values");
        acc -= w * x;
    }
    return schur.U * acc;
}

MatrixXcd riesz_apply(const MatrixXcd& H, cplx center, double radius, int nodes, const MatrixXcd& block) {
    return riesz_apply(schur_form(H), center, radius, nodes, block);
}

int riesz_rank_probe(const SchurForm& schur, cplx center, double radius, int nodes, int probes, std::uint64_t seed) {
    const Eigen::Index n = schur.T.rows();
    for (int p = probes; p <= n; p *= 2) {
        MatrixXcd omega = random_block(n, p, seed);
        MatrixXcd y = riesz_apply(schur, center, radius, nodes, omega);
        MatrixXcd Q = orthonormal_range(y, 1e-8 * std::sqrt(double(n)));
        if (Q.cols() == 0) return 0;
        if (Q.cols() == p && p < n) continue;  // probe block saturated, widen it
        MatrixXcd B = Q.adjoint() * riesz_apply(schur, center, radius, nodes, Q);
        auto ev = eig_general(B, false).values;
        int r = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) r += std::abs(ev[i] - 1.0) <= 1e-6;
        return r;
    }
    return int(n);
}

int riesz_rank_probe(const MatrixXcd& H, cplx center, double radius, int nodes, int probes, std::uint64_t seed) {
    return riesz_rank_probe(schur_form(H), center, radius, nodes, probes, seed);
}

FeshbachReduction::FeshbachReduction(const MatrixXcd& H, const MatrixXcd& basis) {
    const Eigen::Index n = H.rows(), n0 = basis.cols();
    require(n0 >= 1 && n0 < n && basis.rows() == n, ErrorKind::InvalidArgument, "Feshbach basis has wrong shape");
    const double orth = (basis.adjoint() * basis - MatrixXcd::Identity(n0, n0)).cwiseAbs().maxCoeff();
    require(orth < 1e-10, ErrorKind::InvalidArgument, "Feshbach basis is not orthonormal");
    Eigen::HouseholderQR<MatrixXcd> qr(basis);
    MatrixXcd U = qr.householderQ();
    // first n0 columns of U span Ran P0; the rest span its orthogonal complement
    MatrixXcd B = U.adjoint() * H * U;
    const Eigen::Index m = n - n0;
    b11_ = B.topLeftCorner(n0, n0);
    b12_ = B.topRightCorner(n0, m);
    b21_ = B.bottomLeftCorner(m, n0);
    b22_ = schur_form(B.bottomRightCorner(m, m));
    b21_ = b22_.U.adjoint() * b21_;  // kept in the Schur basis of B22
    b12_ = b12_ * b22_.U;
    scale_ = std::max(1.0, b22_.T.cwiseAbs().maxCoeff());
}

MatrixXcd FeshbachReduction::map(cplx z) const {
    MatrixXcd a = b22_.T;
    a.diagonal().array() -= z;
    const double gap = a.diagonal().cwiseAbs().minCoeff() / scale_;
    if (!(gap > 1e-14)) fail(ErrorKind::ReducedSingular, "reduced resolvent singular (relative gap " + fmt17(gap) + ")");
    MatrixXcd x = b21_;
    a.triangularView<Eigen::Upper>().solveInPlace(x);
    if (!x.allFinite()) fail(ErrorKind::ReducedSingular, "reduced solve produced non-finite values");
    MatrixXcd f = b11_ - b12_ * x;
    f.diagonal().array() -= z;
    return f;
}

cplx FeshbachReduction::det(cplx z) const { return map(z).determinant(); }

int FeshbachReduction::winding_number(cplx center, double radius, int nodes) const {
    double total = 0.0;
    cplx prev = det(center + radius);
    for (int m = 1; m <= nodes; ++m) {
        cplx cur = det(center + std::polar(radius, 2.0 * M_PI * m / nodes));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return int(std::lround(total / (2.0 * M_PI)));
}

double aps_probe(const MatrixXcd& H, cplx lambda, int n_vectors, int max_iter) {
    MatrixXcd a = H;
    a.diagonal().array() -= lambda;
    Eigen::PartialPivLU<MatrixXcd> lu(a);
    double best = INFINITY;
    for (int v = 0; v < std::max(1, n_vectors); ++v) {
        VectorXcd x = random_unit_vector(H.rows(), 1000 + std::uint64_t(v));
        double est = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            VectorXcd y = lu.solve(x);
            VectorXcd z = lu.adjoint().solve(y);
            if (!y.allFinite() || !z.allFinite()) return 0.0;  // exactly singular shift
            const double ny = y.norm();
            const double prev = est;
            est = ny;  // ||(H - lambda)^{-1} x|| with unit x
            const double nz = z.norm();
            if (nz == 0.0) fail(ErrorKind::SolveFailure, "inverse iteration collapsed");
            x = z / nz;
            if (it > 3 && std::abs(est - prev) <= 1e-14 * est) break;
        }
        if (est > 0) best = std::min(best, 1.0 / est);
    }
    return best;
}

double aps_probe(const FiberOperator& op, cplx lambda, int n_vectors, int max_iter) {
    return aps_probe(op.matrix, lambda, n_vectors, max_iter);
}

bool FeshbachAnalysis::rank_stable() const {
    return std::all_of(perturbed.begin(), perturbed.end(), [&](const Contour& c) { return c.rank == rank; });
}

double FeshbachAnalysis::min_probe() const {
    double m = INFINITY;
    for (const auto& p : probes) m = std::min(m, p.second);
    return m;
}

nlohmann::json FeshbachAnalysis::to_json() const {
    auto cj = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    nlohmann::json pert = nlohmann::json::array(), pr = nlohmann::json::array();
    for (const auto& c : perturbed)
        pert.push_back({{"center", cj(c.center)}, {"radius", c.radius}, {"nodes", c.nodes}, {"rank", c.rank}});
    for (const auto& [z, v] : probes) pr.push_back({{"z", cj(z)}, {"abs_det", v}});
    return {{"mu", cj(mu)},
            {"rank", rank},
            {"idempotency_defect", idempotency_defect},
            {"perturbed", pert},
            {"abs_det_at_mu", abs_det_at_mu},
            {"probes", pr},
            {"winding_number", winding_number},
            {"aps", aps}};
}

FeshbachAnalysis feshbach_analysis(const MatrixXcd& H, cplx mu, double radius, int nodes, double probe_offset) {
    FeshbachAnalysis a;
    a.mu = mu;
    const SchurForm schur = schur_form(H);
    const RieszProjection rp = riesz_projection(schur, mu, radius, nodes);
    a.rank = rp.rank;
    a.idempotency_defect = rp.idempotency_defect;
    const std::pair<double, double> shapes[] = {{0.0, 1.0}, {0.0, 0.9}, {0.0, 1.1}, {0.2, 1.3}};
    for (std::size_t i = 0; i < 4; ++i) {
        FeshbachAnalysis::Contour c;
        c.center = mu + shapes[i].first * radius;
        c.radius = shapes[i].second * radius;
        c.nodes = i == 0 ? 2 * nodes : nodes;
        c.rank = riesz_rank_probe(schur, c.center, c.radius, c.nodes);
        a.perturbed.push_back(c);
    }
    const MatrixXcd basis = orthonormal_range(rp.P, 1e-8);
    require(basis.cols() >= 1, ErrorKind::SolveFailure, "Riesz projection has an empty range at the given contour");
    const FeshbachReduction fr(H, basis);
    a.abs_det_at_mu = std::abs(fr.det(mu));
    for (cplx d : {cplx(probe_offset, 0), cplx(-probe_offset, 0), cplx(0, probe_offset), cplx(0, -probe_offset)})
        a.probes.emplace_back(mu + d, std::abs(fr.det(mu + d)));
    a.winding_number = fr.winding_number(mu, 0.5 * probe_offset);
    a.aps = aps_probe(H, mu);
    return a;
}

}  // namespace lsd
