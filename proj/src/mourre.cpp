#include "lsd/mourre.hpp"

#include <cmath>

namespace lsd {

double CommutatorMatrix::hermitian_defect() const { return lsd::hermitian_defect(matrix); }

double CommutatorMatrix::norm() const {
    MatrixXcd h = 0.5 * (matrix + matrix.adjoint());
    auto ev = eig_hermitian(h, false).values;
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

CommutatorMatrix assemble_commutator(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                                     const CPoint& xi, const CPoint& xi0) {
    grid.validate();
    pair.validate();
    potential.validate();
    require(xi.size() == 1 && xi0.size() == 1 && max_abs_imag(xi) == 0.0 && max_abs_imag(xi0) == 0.0,
            ErrorKind::InvalidArgument, "commutator needs real xi, xi0 in d = 1");
    const int n = grid.points;
    CommutatorMatrix c;
    c.grid = grid;
    c.xi = xi;
    c.xi0 = xi0;
    std::vector<double> v(n), w0(n), k(n);
    c.multiplication.resize(n);
    CPoint kp(1);
    for (int i = 0; i < n; ++i) {
        k[i] = grid.node(i);
        kp[0] = k[i];
        auto fs = field_and_divergence(pair, xi0, kp);
        v[i] = fs.v[0].real();
        w0[i] = 0.5 * fs.div.real();
        c.multiplication[i] = v[i] * grad_omega_xi(pair, xi, kp)[0].real();
    }
    const double w = kernel_weight(grid);
    c.potential_part.resize(n, n);
    const bool zero = potential.is_zero();
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        try {
            for (int j = 0; j < n; ++j) {
                if (zero) {
                    c.potential_part(i, j) = 0.0;
                    continue;
                }
                const double u = k[j] - k[i];
                const cplx vh = fourier_transform(potential, u);
                const cplx dvh = cplx(0, -1) * moment_transform(potential, u);  // d/du Vhat
                c.potential_part(i, j) = w * ((w0[i] + w0[j]) * vh + (v[j] - v[i]) * dvh);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    c.matrix = c.potential_part;
    c.matrix.diagonal() += c.multiplication.cast<cplx>();
    return c;
}

double mourre_symbol(const DispersionPair& pair, const CPoint& xi, double k) {
    CPoint kp(1);
    kp[0] = k;
    const double x = xi[0].real();
    const double g = grad_omega_xi(pair, xi, kp)[0].real();
    return std::exp(-k * k - x * x) * g * g;
}

nlohmann::json MourreReport::to_json() const {
    return {{"lambda", lambda},
            {"xi", xi},
            {"e", e},
            {"kappa", kappa},
            {"c_upper", c_upper},
            {"compact_norm", compact_norm},
            {"threshold_distance", threshold_distance},
            {"e_argmin", e_argmin},
            {"c_argmax", c_argmax},
            {"shell_samples", shell_samples},
            {"k_free", k_free},
            {"virial_residuals", virial_residuals}};
}

MourreReport extract_constants(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                               double lambda, const CPoint& xi, const std::vector<double>& thresholds,
                               const MourreOptions& opt, const CommutatorMatrix* commutator) {
    require(!thresholds.empty(), ErrorKind::InvalidArgument, "Mourre constants need the threshold set");
    MourreReport r;
    r.lambda = lambda;
    r.xi = xi[0].real();
    double dist = INFINITY;
    for (double t : thresholds) dist = std::min(dist, std::abs(lambda - t));
    r.threshold_distance = dist;
    if (!(dist > opt.min_threshold_distance))
        fail(ErrorKind::ThresholdTooClose, "lambda within " + fmt17(dist) + " of a threshold");
    r.kappa = dist / 4.0;

    const double K = grid.cutoff;
    const long m = long(std::ceil(2.0 * K / opt.shell_step));
    r.e = INFINITY;
    CPoint kp(1);
    for (long i = 0; i <= m; ++i) {
        const double k = -K + 2.0 * K * double(i) / double(m);
        const double g = mourre_symbol(pair, xi, k);
        if (g > r.c_upper) {
            r.c_upper = g;
            r.c_argmax = k;
        }
        kp[0] = k;
        const double om = omega_xi(pair, xi, kp).real();
        if (std::abs(om - lambda) <= 2.0 * r.kappa) {
            ++r.shell_samples;
            if (g < r.e) {
                r.e = g;
                r.e_argmin = k;
            }
        }
    }
    require(r.shell_samples > 0, ErrorKind::InvalidArgument, "energy shell has no samples on the grid range");

    r.k_free = true;
    for (double p : opt.point_spectrum) r.k_free = r.k_free && std::abs(p - lambda) > r.kappa;
    if (commutator == nullptr && !opt.compact_norm) return r;

    CommutatorMatrix local;
    if (commutator == nullptr) {
        local = assemble_commutator(grid, pair, potential, xi, xi);
        commutator = &local;
    }
    MatrixXcd kp_h = 0.5 * (commutator->potential_part + commutator->potential_part.adjoint());
    auto ev = eig_hermitian(kp_h, false).values;
    r.compact_norm = ev.size() ? std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1])) : 0.0;
    return r;
}

std::vector<double> virial_check(const CommutatorMatrix& c, const MatrixXcd& eigenvectors) {
    std::vector<double> out(eigenvectors.cols());
    for (Eigen::Index j = 0; j < eigenvectors.cols(); ++j) {
        VectorXcd psi = eigenvectors.col(j);
        psi /= psi.norm();
        out[j] = psi.dot(c.matrix * psi).real();
    }
    return out;
}

MourreMargin mourre_inequality_check(const CommutatorMatrix& c, const MatrixXcd& H, const MourreReport& report,
                                     const MatrixXcd* p0_basis, std::optional<double> e_override) {
    const Eigen::Index n = H.rows();
    require(c.matrix.rows() == n, ErrorKind::InvalidArgument, "commutator and H sizes differ");
    auto hs = eig_hermitian(0.5 * (H + H.adjoint()), true);
    const double diameter = hs.values[n - 1] - hs.values[0];
    require(report.kappa <= diameter, ErrorKind::InvalidArgument, "kappa exceeds the spectral diameter of H");

    MourreMargin mm;
    mm.e = e_override.value_or(report.e);
    mm.c = report.c_upper;
    mm.kappa = report.kappa;
    VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = hs.values[i];
        const bool outside = std::abs(l - report.lambda) > report.kappa;
        q[i] = outside ? std::sqrt(1.0 + l * l) : 0.0;
        mm.window_states += !outside;
    }
    MatrixXcd S = 0.5 * (c.matrix + c.matrix.adjoint());
    S += mm.c * (hs.vectors * q.cast<cplx>().asDiagonal() * hs.vectors.adjoint());
    S.diagonal().array() -= mm.e;
    if (p0_basis != nullptr && p0_basis->cols() > 0) {
        S += mm.c * (*p0_basis) * p0_basis->adjoint();
        mm.with_p0 = true;
    }
    S = 0.5 * (S + S.adjoint());
    mm.margin = eig_hermitian(S, false).values[0];
    return mm;
}

}  // namespace lsd
