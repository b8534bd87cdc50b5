#include "lsd/commlab.hpp"

#include <cmath>
#include <random>

namespace lsd {

void MatrixPair::validate() const {
    require(H.rows() == H.cols() && A.rows() == A.cols() && H.rows() == A.rows(), ErrorKind::InvalidArgument,
            "H and A must be square of equal size");
    require(H.rows() >= 1 && H.rows() <= 200, ErrorKind::InvalidArgument, "pair size must lie in [1, 200]");
    const double tol = 1e-14;
    require(hermitian_defect(H) <= tol * std::max(1.0, H.norm()), ErrorKind::InvalidArgument, "H is not Hermitian");
    require(hermitian_defect(A) <= tol * std::max(1.0, A.norm()), ErrorKind::InvalidArgument, "A is not Hermitian");
}

MatrixPair random_pair(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto draw = [&] {
        MatrixXcd m(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) m(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(2.0);
        MatrixXcd h = 0.5 * (m + m.adjoint());
        return h;
    };
    MatrixPair p;
    p.H = draw();
    p.A = draw();
    p.provenance = "random n=" + std::to_string(n) + " seed=" + std::to_string(seed);
    return p;
}

MatrixPair pauli_pair() {
    MatrixPair p;
    p.H = MatrixXcd::Zero(2, 2);
    p.A = MatrixXcd::Zero(2, 2);
    p.H(0, 1) = p.H(1, 0) = 1.0;
    p.A(0, 0) = 1.0;
    p.A(1, 1) = -1.0;
    p.provenance = "pauli sigma_x / sigma_z";
    return p;
}

MatrixXcd resolvent_at_minus_i(const MatrixXcd& H) {
    auto es = eig_hermitian(H, true);
    VectorXcd d(es.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = 1.0 / (es.values[i] + cplx(0, 1));
    return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

double spectral_norm(const MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<MatrixXcd> svd(m);
    return svd.singularValues()[0];
}

double CommutatorLadder::radius() const { return growth_constant > 0.0 ? 1.0 / (3.0 * growth_constant) : INFINITY; }

CommutatorLadder ladder(const MatrixPair& pair, int k_max) {
    pair.validate();
    require(k_max >= 0, ErrorKind::InvalidArgument, "k_max must be non-negative");
    CommutatorLadder lad;
    const MatrixXcd R = resolvent_at_minus_i(pair.H);
    lad.ad.push_back(pair.H);
    lad.weighted_norms.push_back(spectral_norm(pair.H * R));
    double log_fact = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const MatrixXcd& prev = lad.ad.back();
        lad.ad.push_back(prev * pair.A - pair.A * prev);
        const double w = spectral_norm(lad.ad.back() * R);
        lad.weighted_norms.push_back(w);
        log_fact += std::log(double(k));
        if (w > 0.0) lad.growth_constant = std::max(lad.growth_constant, std::exp((std::log(w) - log_fact) / k));
    }
    return lad;
}

MatrixXcd exact_conjugation(const MatrixPair& pair, cplx theta) {
    auto es = eig_hermitian(pair.A, true);
    const Eigen::Index n = es.values.size();
    VectorXcd ep(n), em(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ep[i] = std::exp(cplx(0, 1) * theta * es.values[i]);
        em[i] = std::exp(-cplx(0, 1) * theta * es.values[i]);
    }
    const MatrixXcd& U = es.vectors;
    return U * ep.asDiagonal() * (U.adjoint() * pair.H * U) * em.asDiagonal() * U.adjoint();
}

SeriesResult conjugate_series(const CommutatorLadder& lad, cplx theta, int k_max) {
    require(!lad.ad.empty(), ErrorKind::InvalidArgument, "empty ladder");
    if (k_max < 0) k_max = int(lad.ad.size()) - 1;
    require(std::size_t(k_max) < lad.ad.size(), ErrorKind::InvalidArgument, "k_max beyond the computed ladder");
    if (std::abs(theta) >= lad.radius())
        fail(ErrorKind::RadiusExceeded, "|theta| = " + fmt17(std::abs(theta)) + " >= R' = " + fmt17(lad.radius()));
    SeriesResult r;
    r.matrix = lad.ad[0];
    cplx coef = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        coef *= -theta * cplx(0, 1) / double(k);
        r.matrix += coef * lad.ad[k];
    }
    const double q = lad.growth_constant * std::abs(theta);
    r.truncation_bound = q > 0.0 ? std::pow(q, k_max + 1) / (1.0 - q) : 0.0;
    return r;
}

WThetaReport w_theta_bound(const MatrixPair& pair, const CommutatorLadder& lad, cplx theta) {
    if (std::abs(theta) >= lad.radius())
        fail(ErrorKind::RadiusExceeded, "|theta| = " + fmt17(std::abs(theta)) + " >= R' = " + fmt17(lad.radius()));
    WThetaReport w;
    const MatrixXcd R = resolvent_at_minus_i(pair.H);
    w.actual = spectral_norm((exact_conjugation(pair, theta) - pair.H) * R);
    const double q = lad.growth_constant * std::abs(theta);
    w.bound = q / (1.0 - q);
    return w;
}

FiniteSectorReport sector_bound_finite(const MatrixPair& pair, cplx theta, double C) {
    FiniteSectorReport r;
    r.worst_margin = INFINITY;
    const auto es = eig_general(exact_conjugation(pair, theta), false);
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        const cplx l = es.values[i];
        const double m = 4.0 * C * std::abs(theta) * (std::abs(l.real()) + 1.0) - std::abs(l.imag());
        r.worst_margin = std::min(r.worst_margin, m);
        if (m < 0.0) ++r.violations;
    }
    return r;
}

VectorXcd gaussian_regularize(const MatrixPair& pair, const VectorXcd& psi, int m, cplx theta) {
    require(m > 0, ErrorKind::InvalidArgument, "m must be positive");
    require(psi.size() == pair.size(), ErrorKind::InvalidArgument, "vector size mismatch");
    auto es = eig_hermitian(pair.A, true);
    VectorXcd c = es.vectors.adjoint() * psi;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double a = es.values[i];
        c[i] *= std::exp(-a * a / (2.0 * m) + cplx(0, 1) * theta * a);
    }
    return es.vectors * c;
}

RegularizationReport regularization_convergence(const MatrixPair& pair, const VectorXcd& psi, double theta,
                                                const std::vector<int>& ms) {
    require(ms.size() >= 2, ErrorKind::InsufficientPoints, "need at least two values of m");
    auto es = eig_hermitian(pair.A, true);
    VectorXcd c = es.vectors.adjoint() * psi;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(cplx(0, theta * es.values[i]));
    const VectorXcd target = es.vectors * c;
    RegularizationReport r;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int m : ms) {
        const double e = (gaussian_regularize(pair, psi, m, theta) - target).norm();
        r.m.push_back(m);
        r.error.push_back(e);
        const double x = std::log(double(m)), y = std::log(std::max(e, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(ms.size());
    r.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return r;
}

double series_adjoint_defect(const CommutatorLadder& lad, cplx theta, int k_max) {
    const MatrixXcd s = conjugate_series(lad, theta, k_max).matrix;
    const MatrixXcd sc = conjugate_series(lad, std::conj(theta), k_max).matrix;
    return (s.adjoint() - sc).norm() / std::max(s.norm(), 1e-300);
}

GraphNormReport graph_norm_check(const MatrixPair& pair, cplx theta, int samples, std::uint64_t seed) {
    const MatrixXcd Ht = exact_conjugation(pair, theta);
    const cplx i(0, 1);
    GraphNormReport r;
    for (int s = 0; s < samples; ++s) {
        const VectorXcd psi = random_unit_vector(pair.size(), seed + std::uint64_t(s));
        const double num = (Ht * psi + i * psi).norm();
        const double den = (pair.H * psi + i * psi).norm();
        r.min_ratio = std::min(r.min_ratio, num / den);
        r.max_ratio = std::max(r.max_ratio, num / den);
    }
    return r;
}

double contour_derivative_defect(const MatrixPair& pair, const CommutatorLadder& lad, const VectorXcd& psi,
                                 double radius, int k_max, int nodes) {
    require(std::size_t(k_max) < lad.ad.size(), ErrorKind::InvalidArgument, "k_max beyond the computed ladder");
    std::vector<VectorXcd> b(k_max + 1, VectorXcd::Zero(psi.size()));
    for (int m = 0; m < nodes; ++m) {
        const cplx th = std::polar(radius, 2.0 * M_PI * m / nodes);
        const VectorXcd f = exact_conjugation(pair, th) * psi;
        cplx p = 1.0;
        for (int k = 0; k <= k_max; ++k, p /= th) b[k] += (p / double(nodes)) * f;
    }
    double worst = 0.0, fact = 1.0;
    cplx phase = 1.0;
    for (int k = 0; k <= k_max; ++k) {
        if (k > 0) {
            fact *= k;
            phase *= cplx(0, -1);
        }
        const VectorXcd ref = phase * (lad.ad[k] * psi);
        worst = std::max(worst, (fact * b[k] - ref).norm() / std::max(1.0, ref.norm()));
    }
    return worst;
}

std::vector<SeedResult> commlab_batch(const std::vector<std::uint64_t>& seeds, const BatchOptions& opt) {
    std::vector<SeedResult> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        try {
            const MatrixPair p = random_pair(opt.n, seeds[s]);
            const CommutatorLadder lad = ladder(p, opt.k_max);
            SeedResult r;
            r.seed = seeds[s];
            r.C = lad.growth_constant;
            r.r_prime = lad.radius();
            const cplx theta = std::polar(opt.radius_fraction * r.r_prime, opt.theta_arg);
            const MatrixXcd exact = exact_conjugation(p, theta);
            r.series_deviation = (conjugate_series(lad, theta).matrix - exact).norm() / exact.norm();
            r.adjoint_defect = series_adjoint_defect(lad, theta);
            r.w_ratio = w_theta_bound(p, lad, theta).ratio();
            r.sector_violations = sector_bound_finite(p, theta, r.C).violations;
            out[s] = r;
        } catch (...) {
            errors[s] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

nlohmann::json batch_json(const std::vector<SeedResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    double worst = 0.0;
    for (const auto& r : results) {
        arr.push_back({{"seed", r.seed},
                       {"C", r.C},
                       {"R_prime", r.r_prime},
                       {"series_deviation", r.series_deviation},
                       {"adjoint_defect", r.adjoint_defect},
                       {"w_ratio", r.w_ratio},
                       {"sector_violations", r.sector_violations}});
        worst = std::max(worst, r.series_deviation);
    }
    return {{"seeds", arr}, {"worst_series_deviation", worst}};
}

}  // namespace lsd
