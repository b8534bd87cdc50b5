#include "lsd/operator.hpp"

#include "lsd/linalg.hpp"

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace lsd {

MatrixXcd FiberOperator::kernel_part() const {
    MatrixXcd t = matrix;
    t.diagonal() -= multiplication;
    return t;
}

double admissible_R(const FieldBounds& b, double strip_radius, double a_prime, int dim) {
    double r = strip_radius / (b.c_omega + 1.0);
    return std::min({r, a_prime / (b.c_omega + 1.0), M_PI / (dim * b.c_omega_prime + 1.0)});
}

double kernel_weight(const MomentumGrid& grid) { return std::pow(2.0 * M_PI, -0.5 * grid.dim) * grid.spacing(); }

namespace {

void check_tail(const MomentumGrid& grid, const PotentialSpec& potential, const AssemblyOptions& opt, FiberOperator& op) {
    op.tail_tolerance = opt.tail_tolerance;
    if (potential.is_zero()) return;
    double scale = 0.0;
    if (opt.c_v) {
        scale = *opt.c_v;
    } else {
        for (int m = 0; m < grid.points; ++m) scale = std::max(scale, std::abs(fourier_transform(potential, m * grid.spacing())));
    }
    const double two_k = 2.0 * grid.cutoff;
    double tail = std::max(std::abs(fourier_transform(potential, two_k)), std::abs(fourier_transform(potential, -two_k)));
    op.tail_ratio = scale > 0 ? tail / scale : 0.0;
    if (op.tail_ratio > opt.tail_tolerance)
        fail(ErrorKind::GridTooCoarse, "|Vhat(2K)| / scale = " + fmt17(op.tail_ratio) + " exceeds tail tolerance " +
                                           fmt17(opt.tail_tolerance));
}

inline void fill_row(MatrixXcd& out, const PotentialSpec& potential, const std::vector<cplx>& gamma,
                     const std::vector<cplx>& s, const VectorXcd& diag, double w, Eigen::Index i) {
    const Eigen::Index n = out.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        cplx v = potential.is_zero() ? cplx(0.0) : fourier_transform(potential, gamma[j] - gamma[i]);
        out(i, j) = w * s[i] * v * s[j];
    }
    out(i, i) += diag[i];
}

}  // namespace

void fill_dilated_matrix(MatrixXcd& out, const PotentialSpec& potential, const std::vector<cplx>& gamma,
                         const std::vector<cplx>& s, const VectorXcd& diag, double w) {
    const Eigen::Index n = Eigen::Index(gamma.size());
    out.resize(n, n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            fill_row(out, potential, gamma, s, diag, w, i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void fill_dilated_matrix_serial(MatrixXcd& out, const PotentialSpec& potential, const std::vector<cplx>& gamma,
                                const std::vector<cplx>& s, const VectorXcd& diag, double w) {
    const Eigen::Index n = Eigen::Index(gamma.size());
    out.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) fill_row(out, potential, gamma, s, diag, w, i);
}

FiberOperator assemble_H(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                         const CPoint& xi, const AssemblyOptions& opt) {
    grid.validate();
    pair.validate();
    potential.validate();
    require(xi.size() == 1 && max_abs_imag(xi) == 0.0, ErrorKind::InvalidArgument, "assemble_H needs real xi, d = 1");
    FiberOperator op;
    op.grid = grid;
    op.xi = xi;
    op.grid_id = grid.id();
    op.potential_id = potential.describe();
    check_tail(grid, potential, opt, op);

    const int n = grid.points;
    std::vector<cplx> gamma(n), s(n, 1.0);
    op.multiplication.resize(n);
    CPoint k(1);
    for (int i = 0; i < n; ++i) {
        gamma[i] = grid.node(i);
        k[0] = gamma[i];
        op.multiplication[i] = omega_xi(pair, xi, k);
    }
    fill_dilated_matrix(op.matrix, potential, gamma, s, op.multiplication, kernel_weight(grid));
    op.norm_estimate = max_row_sum(op.matrix);
    return op;
}

cplx deformation_flow_time(cplx theta) { return -theta; }

FlowTable build_deformation_table(const MomentumGrid& grid, const FlowProblem& prob, cplx theta) {
    return build_flow_table(grid, prob, deformation_flow_time(theta));
}

FiberOperator assemble_H_theta(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                               const CPoint& xi, const FlowTable& table, const DeformationParams& params,
                               const AssemblyOptions& opt) {
    grid.validate();
    pair.validate();
    potential.validate();
    require(table.grid_id == grid.id(), ErrorKind::InvalidArgument, "flow table grid mismatch");
    require(table.size() == std::size_t(grid.points), ErrorKind::InvalidArgument, "flow table size mismatch");
    require(xi.size() == 1 && table.xi.size() == 1 && table.xi[0] == xi[0], ErrorKind::InvalidArgument,
            "flow table xi mismatch");
    require(table.theta == deformation_flow_time(params.theta), ErrorKind::InvalidArgument,
            "flow table time does not match -theta");
    const double at = std::abs(params.theta);
    if (params.theta != 0.0 && !(at < params.admissible_R))
        fail(ErrorKind::RadiusExceeded, "|theta| = " + fmt17(at) + " not below admissible R = " + fmt17(params.admissible_R));
    if (params.c_omega > 0.0 && !(2.0 * params.c_omega * at < potential.strip()))
        fail(ErrorKind::StripViolation, "2 C_omega |theta| exceeds the Vhat strip a'");
    for (std::size_t i = 0; i < table.size(); ++i)
        if (!(std::abs(table.jac_arg[i]) < M_PI))
            fail(ErrorKind::BranchFailure, "|arg J| >= pi at node " + std::to_string(i));

    FiberOperator op;
    op.grid = grid;
    op.xi = xi;
    op.theta = params.theta;
    op.grid_id = grid.id();
    op.potential_id = potential.describe();
    check_tail(grid, potential, opt, op);

    const int n = grid.points;
    std::vector<cplx> gamma(n), s(n);
    op.multiplication.resize(n);
    for (int i = 0; i < n; ++i) {
        gamma[i] = table.gamma[i][0];
        // principal root through the tracked logarithm
        s[i] = std::exp(0.5 * table.log_jac[i]);
        op.multiplication[i] = omega_xi(pair, xi, table.gamma[i]);
    }
    fill_dilated_matrix(op.matrix, potential, gamma, s, op.multiplication, kernel_weight(grid));
    op.norm_estimate = max_row_sum(op.matrix);
    return op;
}

double c_d_integral(int dim, int d_prime) {
    boost::math::quadrature::sinh_sinh<double> ss;
    if (dim == 1) return ss.integrate([&](double k) { return 1.0 / (1.0 + std::pow(std::abs(k), d_prime)); });
    // radial: |S^{d-1}| int_0^inf r^{d-1} / (1 + r^{d'}) dr
    const double sphere = dim == 2 ? 2.0 * M_PI : 4.0 * M_PI;
    double half = ss.integrate([&](double r) {
        double a = std::abs(r);
        return std::pow(a, dim - 1) / (1.0 + std::pow(a, d_prime));
    });
    return sphere * 0.5 * half;
}

KernelNormReport dilated_kernel_norm_check(const FiberOperator& op, const FieldBounds& bounds, const FourierKernel& kernel) {
    KernelNormReport r;
    MatrixXcd t = op.kernel_part();
    r.norm = power_norm([&](const VectorXcd& x) { return VectorXcd(t * x); },
                        [&](const VectorXcd& x) { return VectorXcd(t.adjoint() * x); }, t.rows());
    r.c_d = c_d_integral(op.grid.dim, kernel.d_prime);
    const double d = op.grid.dim;
    r.bound = std::pow(2.0 * M_PI, -0.5 * d) * kernel.c_v * r.c_d *
              std::exp((d + kernel.d_prime) * bounds.c_omega_prime * std::abs(op.theta));
    return r;
}

double resolvent_weighted_norm(const MatrixXcd& B, const MatrixXcd& H, std::uint64_t seed) {
    const Eigen::Index n = H.rows();
    MatrixXcd hp = H;
    hp.diagonal().array() += cplx(0, 1);
    MatrixXcd hm = H;
    hm.diagonal().array() -= cplx(0, 1);
    Eigen::PartialPivLU<MatrixXcd> lup(hp), lum(hm);
    // (H + i)^{-*} = (H - i)^{-1} for Hermitian H
    return power_norm([&](const VectorXcd& x) { return VectorXcd(B * lup.solve(x)); },
                      [&](const VectorXcd& y) { return VectorXcd(lum.solve(B.adjoint() * y)); }, n, seed);
}

RelativeBoundReport relative_bound_check(const FiberOperator& op_theta, const FiberOperator& op_0, double C, int samples,
                                         std::uint64_t seed) {
    require(op_theta.size() == op_0.size(), ErrorKind::InvalidArgument, "operator size mismatch");
    require(op_0.theta == 0.0, ErrorKind::InvalidArgument, "reference operator must be undeformed");
    RelativeBoundReport r;
    MatrixXcd w = op_theta.matrix - op_0.matrix;
    r.w_norm = w.cwiseAbs().maxCoeff() == 0.0 ? 0.0 : resolvent_weighted_norm(w, op_0.matrix);
    r.bound = 1.5 * C * std::abs(op_theta.theta);
    r.samples = samples;
    r.ratio_min = INFINITY;
    r.ratio_max = 0.0;
    for (int s = 0; s < samples; ++s) {
        VectorXcd psi = random_unit_vector(op_0.size(), seed + std::uint64_t(s));
        double gh = 1.0 + (op_0.matrix * psi).norm();
        double gt = 1.0 + (op_theta.matrix * psi).norm();
        r.ratio_min = std::min(r.ratio_min, gt / gh);
        r.ratio_max = std::max(r.ratio_max, gt / gh);
    }
    return r;
}

double adjoint_defect(const FiberOperator& op_theta, const FiberOperator& op_conj) {
    require(op_theta.size() == op_conj.size(), ErrorKind::InvalidArgument, "operator size mismatch");
    return (op_theta.matrix.adjoint() - op_conj.matrix).cwiseAbs().maxCoeff();
}

ConjugationReport conjugation_check(const FiberOperator& op_theta, const FiberOperator& op_conj, bool potential_even,
                                    ConjugationMode mode) {
    require(op_theta.size() == op_conj.size(), ErrorKind::InvalidArgument, "operator size mismatch");
    ConjugationReport r;
    r.applicable = potential_even;
    if (!potential_even && mode == ConjugationMode::Strict)
        fail(ErrorKind::NotApplicable, "conjugation symmetry needs an even potential");
    r.defect = (op_theta.matrix.conjugate() - op_conj.matrix).cwiseAbs().maxCoeff();
    r.tolerance = 1e-13 * std::max(op_theta.norm_estimate, op_conj.norm_estimate);
    return r;
}

void write_matrix_binary(const MatrixXcd& m, int dim, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "binary matrix layout assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    require(bool(os), ErrorKind::IoError, "cannot open " + path);
    const char magic[8] = {'L', 'S', 'D', 'M', 'A', 'T', '0', '1'};
    os.write(magic, 8);
    std::uint64_t hdr[3] = {std::uint64_t(m.rows()), std::uint64_t(dim), 1};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double p[2] = {m(i, j).real(), m(i, j).imag()};
            os.write(reinterpret_cast<const char*>(p), sizeof p);
        }
    require(bool(os), ErrorKind::IoError, "write failed for " + path);
}

MatrixXcd read_matrix_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), ErrorKind::IoError, "cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    require(is && std::memcmp(magic, "LSDMAT01", 8) == 0, ErrorKind::IoError, "bad matrix magic in " + path);
    std::uint64_t hdr[3];
    is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    require(is && hdr[2] == 1, ErrorKind::IoError, "unsupported matrix layout in " + path);
    const Eigen::Index n = Eigen::Index(hdr[0]);
    MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double p[2];
            is.read(reinterpret_cast<char*>(p), sizeof p);
            m(i, j) = cplx(p[0], p[1]);
        }
    require(bool(is), ErrorKind::IoError, "truncated matrix file " + path);
    return m;
}

}  // namespace lsd
