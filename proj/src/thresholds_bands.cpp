#include "lsd/thresholds_bands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace lsd {

double ThresholdSet::distance(double lambda) const {
    double d = INFINITY;
    for (double t : critical_values) d = std::min(d, std::abs(lambda - t));
    return d;
}

bool ThresholdSet::hits(double lo, double hi) const {
    return std::any_of(critical_values.begin(), critical_values.end(), [&](double t) { return t >= lo && t <= hi; });
}

ThresholdSet threshold_set(const DispersionPair& pair, double xi, const std::vector<double>& seeds, double newton_tol,
                           int max_iter) {
    require(pair.dim() == 1, ErrorKind::InvalidArgument, "threshold search is implemented for d = 1");
    ThresholdSet ts;
    ts.xi = xi;
    ts.newton_tol = newton_tol;
    CPoint x(1), k(1);
    x[0] = xi;
    auto grad = [&](double kk) {
        k[0] = kk;
        return grad_omega_xi(pair, x, k)[0].real();
    };
    std::vector<double> roots;
    for (double s : seeds) {
        double kk = s;
        bool ok = false;
        for (int it = 0; it < max_iter && std::isfinite(kk); ++it) {
            const double g = grad(kk);
            if (std::abs(g) <= newton_tol) {
                ok = true;
                break;
            }
            k[0] = kk;
            const double h = hessian_omega_xi(pair, x, k)(0, 0).real();
            if (h == 0.0) break;
            kk -= g / h;
        }
        if (ok)
            roots.push_back(kk);
        else
            ++ts.dropped_seeds;
    }
    std::sort(roots.begin(), roots.end());
    for (double r : roots)
        if (ts.critical_points.empty() || r - ts.critical_points.back() > 1e-6 * (1.0 + std::abs(r)))
            ts.critical_points.push_back(r);
    std::vector<double> vals;
    for (double r : ts.critical_points) {
        k[0] = r;
        vals.push_back(omega_xi(pair, x, k).real());
    }
    std::sort(vals.begin(), vals.end());
    for (double v : vals)
        if (ts.critical_values.empty() || v - ts.critical_values.back() > 1e-9) ts.critical_values.push_back(v);
    return ts;
}

void write_thresholds_csv(const std::vector<ThresholdSet>& sets, const std::string& path) {
    std::ofstream f(path);
    require(bool(f), ErrorKind::IoError, "cannot write " + path);
    f << "xi,critical_value\n";
    for (const auto& s : sets)
        for (double v : s.critical_values) f << fmt17(s.xi) << ',' << fmt17(v) << '\n';
}

void BandData::write_csv(const std::string& path) const {
    std::ofstream f(path);
    require(bool(f), ErrorKind::IoError, "cannot write " + path);
    f << "xi,branch_id,re_lambda,im_lambda,multiplicity,residual\n";
    for (const auto& b : branches)
        for (const auto& s : b.samples)
            f << fmt17(s.xi) << ',' << b.id << ',' << fmt17(s.lambda.real()) << ',' << fmt17(s.lambda.imag()) << ','
              << s.multiplicity << ',' << fmt17(s.residual) << '\n';
}

namespace {

struct Candidate {
    cplx lambda;
    double residual;
    int multiplicity;
};

std::vector<Candidate> candidates_at(const BandInput& in, const Rectangle& rect, const BandOptions& opt) {
    SpectrumReport rep = eigendecompose(in.op);
    classify(rep, in.op, opt.classifier);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < rep.size(); ++i) {
        const cplx l = rep.eigenvalues[i];
        if (rep.classes[i] != SpectralClass::IsolatedReal || !rect.contains(l, in.op.theta)) continue;
        // values closer than matching_tol are one cluster; Riesz rank gives its multiplicity
        bool dup = false;
        for (const auto& c : out) dup = dup || std::abs(c.lambda - l) < opt.matching_tol;
        if (dup) continue;
        double gap = INFINITY;
        for (std::size_t j = 0; j < rep.size(); ++j)
            if (std::abs(rep.eigenvalues[j] - l) >= opt.matching_tol) gap = std::min(gap, std::abs(rep.eigenvalues[j] - l));
        const double radius = std::min(opt.riesz_radius, 0.5 * gap);
        const int mult = riesz_rank_probe(in.op.matrix, l, radius, opt.riesz_nodes);
        out.push_back({l, rep.residuals[i], mult});
    }
    return out;
}

}  // namespace

BandData band_sweep(const BandFactory& factory, const std::vector<double>& xi_grid, const Rectangle& rect,
                    const BandOptions& opt) {
    BandData band;
    band.xi_grid = xi_grid;
    band.matching_tol = opt.matching_tol;
    band.band_lipschitz = opt.band_lipschitz;
    std::vector<int> open;  // indices into band.branches still being extended
    for (std::size_t n = 0; n < xi_grid.size(); ++n) {
        const double xi = xi_grid[n];
        BandInput in = factory(xi);
        const Rectangle r = in.rect.value_or(rect);
        const double lo = r.center - r.half_width, hi = r.center + r.half_width;
        if (in.thresholds.hits(lo, hi))
            fail(ErrorKind::ThresholdCollision, "rectangle meets the threshold set at xi = " + fmt17(xi));
        auto cands = candidates_at(in, r, opt);

        std::vector<bool> used(cands.size(), false);
        std::vector<int> still_open;
        for (int bi : open) {
            Branch& b = band.branches[bi];
            const BandSample& last = b.samples.back();
            const double guard = opt.band_lipschitz * std::abs(xi - last.xi) + opt.matching_tol;
            int best = -1, within = 0;
            double bd = INFINITY;
            for (std::size_t c = 0; c < cands.size(); ++c) {
                const double d = std::abs(cands[c].lambda - last.lambda);
                if (d > guard) continue;
                ++within;
                if (!used[c] && d < bd) {
                    bd = d;
                    best = int(c);
                }
            }
            if (within > 1) {
                if (opt.throw_on_ambiguity)
                    fail(ErrorKind::MatchingAmbiguous, "several candidates continue branch " + std::to_string(b.id) +
                                                           " at xi = " + fmt17(xi));
                band.gaps.push_back(int(n));
                continue;
            }
            if (best < 0) {
                band.gaps.push_back(int(n));
                continue;
            }
            used[best] = true;
            const auto& c = cands[best];
            b.samples.push_back({xi, c.lambda, c.multiplicity, c.residual,
                                 in.thresholds.distance(c.lambda.real()) < opt.near_threshold});
            b.xi_index.push_back(int(n));
            still_open.push_back(bi);
        }
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (used[c]) continue;
            Branch b;
            b.id = int(band.branches.size());
            b.samples.push_back({xi, cands[c].lambda, cands[c].multiplicity, cands[c].residual,
                                 in.thresholds.distance(cands[c].lambda.real()) < opt.near_threshold});
            b.xi_index.push_back(int(n));
            band.branches.push_back(std::move(b));
            still_open.push_back(band.branches.back().id);
        }
        open = std::move(still_open);
    }
    std::sort(band.gaps.begin(), band.gaps.end());
    band.gaps.erase(std::unique(band.gaps.begin(), band.gaps.end()), band.gaps.end());
    return band;
}

double polynomial_fit_residual(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const std::size_t n = x.size();
    require(n == y.size(), ErrorKind::InvalidArgument, "fit data sizes differ");
    require(degree >= 0 && n >= std::size_t(degree) + 3, ErrorKind::InsufficientPoints,
            "need at least degree + 3 samples");
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double c = 0.5 * (*mn + *mx), s = std::max(0.5 * (*mx - *mn), 1e-300);
    Eigen::MatrixXd A(n, degree + 1);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (x[i] - c) / s;
        double p = 1.0;
        for (int j = 0; j <= degree; ++j, p *= t) A(i, j) = p;
        b[i] = y[i];
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    return (A * coef - b).cwiseAbs().maxCoeff();
}

std::vector<double> puiseux_residuals(const std::vector<double>& x, const std::vector<double>& y, double x0) {
    std::vector<double> out;
    for (int l = 1; l <= 3; ++l) {
        std::vector<double> u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = std::pow(std::abs(x[i] - x0), 1.0 / l);
        out.push_back(polynomial_fit_residual(u, y, 2));
    }
    return out;
}

FitReport branch_regularity(const BandData& band, int branch_id, int degree, std::optional<double> meeting_point) {
    require(branch_id >= 0 && std::size_t(branch_id) < band.branches.size(), ErrorKind::InvalidArgument,
            "no branch " + std::to_string(branch_id));
    const Branch& br = band.branches[branch_id];
    std::vector<double> x, y;
    for (const auto& s : br.samples) {
        x.push_back(s.xi);
        y.push_back(s.lambda.real());
    }
    FitReport rep;
    rep.branch_id = branch_id;
    for (int d = 0; d <= degree; ++d) rep.residuals.push_back(polynomial_fit_residual(x, y, d));

    if (!meeting_point) {
        // another branch ending or starting next to one of our endpoints
        for (const auto& other : band.branches) {
            if (other.id == br.id) continue;
            for (const auto* mine : {&br.samples.front(), &br.samples.back()})
                for (const auto* theirs : {&other.samples.front(), &other.samples.back()})
                    if (std::abs(mine->lambda - theirs->lambda) < 10.0 * band.matching_tol + 1e-3 &&
                        std::abs(mine->xi - theirs->xi) <= 1e-12 + 1e-9 * std::abs(mine->xi))
                        meeting_point = mine->xi;
        }
    }
    if (meeting_point) {
        rep.meeting_point = meeting_point;
        rep.puiseux_residuals = puiseux_residuals(x, y, *meeting_point);
        rep.puiseux_order =
            1 + int(std::min_element(rep.puiseux_residuals.begin(), rep.puiseux_residuals.end()) -
                    rep.puiseux_residuals.begin());
    }
    return rep;
}

}  // namespace lsd
