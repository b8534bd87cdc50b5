#include "lsd/linalg.hpp"

#include <lapacke.h>

#include <random>

namespace lsd {

EigenSystem eig_general(const MatrixXcd& a, bool vectors) {
    require(a.rows() == a.cols(), ErrorKind::InvalidArgument, "eigenproblem needs a square matrix");
    const lapack_int n = lapack_int(a.rows());
    EigenSystem out;
    out.values.resize(n);
    if (n == 0) return out;
    MatrixXcd work = a;  // column-major copy, overwritten
    MatrixXcd vr;
    if (vectors) vr.resize(n, n);
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n,
                                    reinterpret_cast<lapack_complex_double*>(work.data()), n,
                                    reinterpret_cast<lapack_complex_double*>(out.values.data()), nullptr, 1,
                                    vectors ? reinterpret_cast<lapack_complex_double*>(vr.data()) : nullptr, n);
    if (info > 0) fail(ErrorKind::ConvergenceFailure, "zgeev failed to converge at eigenvalue index " + std::to_string(info));
    require(info == 0, ErrorKind::InvalidArgument, "zgeev argument error " + std::to_string(info));
    if (vectors) out.vectors = std::move(vr);
    return out;
}

SchurForm schur_form(const MatrixXcd& a) {
    require(a.rows() == a.cols(), ErrorKind::InvalidArgument, "Schur form needs a square matrix");
    const lapack_int n = lapack_int(a.rows());
    SchurForm s;
    s.T = a;
    s.U.resize(n, n);
    if (n == 0) return s;
    VectorXcd w(n);
    lapack_int sdim = 0;
    lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, reinterpret_cast<lapack_complex_double*>(s.T.data()),
                                    n, &sdim, reinterpret_cast<lapack_complex_double*>(w.data()),
                                    reinterpret_cast<lapack_complex_double*>(s.U.data()), n);
    if (info > 0) fail(ErrorKind::ConvergenceFailure, "zgees failed to converge (info " + std::to_string(info) + ")");
    require(info == 0, ErrorKind::InvalidArgument, "zgees argument error " + std::to_string(info));
    s.T.triangularView<Eigen::StrictlyLower>().setZero();
    return s;
}

MatrixXcd SchurForm::shifted_inverse(cplx z) const {
    MatrixXcd r = T;
    r.diagonal().array() -= z;
    const lapack_int n = lapack_int(r.rows());
    lapack_int info = LAPACKE_ztrtri(LAPACK_COL_MAJOR, 'U', 'N', n, reinterpret_cast<lapack_complex_double*>(r.data()), n);
    if (info > 0) fail(ErrorKind::SolveFailure, "shifted Schur factor is singular at diagonal " + std::to_string(info));
    require(info == 0, ErrorKind::InvalidArgument, "ztrtri argument error " + std::to_string(info));
    r.triangularView<Eigen::StrictlyLower>().setZero();
    if (!r.allFinite()) fail(ErrorKind::SolveFailure, "shifted triangular inverse produced non-finite values");
    return r;
}

MatrixXcd SchurForm::shifted_solve(cplx z, const MatrixXcd& b) const {
    MatrixXcd r = T;
    r.diagonal().array() -= z;
    if ((r.diagonal().array() == cplx(0.0)).any()) fail(ErrorKind::SolveFailure, "shifted Schur factor is singular");
    MatrixXcd y = U.adjoint() * b;
    r.triangularView<Eigen::Upper>().solveInPlace(y);
    MatrixXcd x = U * y;
    if (!x.allFinite()) fail(ErrorKind::SolveFailure, "shifted solve produced non-finite values");
    return x;
}

HermitianSystem eig_hermitian(const MatrixXcd& a, bool vectors) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorKind::ConvergenceFailure, "Hermitian eigensolver failed");
    HermitianSystem h;
    h.values = es.eigenvalues();
    if (vectors) h.vectors = es.eigenvectors();
    return h;
}

double max_row_sum(const MatrixXcd& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

double hermitian_defect(const MatrixXcd& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

VectorXcd random_unit_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
    return v / v.norm();
}

MatrixXcd random_block(Eigen::Index n, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    MatrixXcd m(n, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

double power_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index n, std::uint64_t seed,
                  int max_iter, double rel_tol) {
    VectorXcd x = random_unit_vector(n, seed);
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        VectorXcd y = apply(x);
        double ny = y.norm();
        if (!std::isfinite(ny)) fail(ErrorKind::NonFinite, "power iteration diverged");
        if (ny == 0.0) return 0.0;
        VectorXcd z = apply_adjoint(y);
        double nz = z.norm();
        if (nz == 0.0) return ny;
        double prev = est;
        est = ny;
        x = z / nz;
        if (it > 3 && std::abs(est - prev) <= rel_tol * est) break;
    }
    return est;
}

MatrixXcd orthonormal_range(const MatrixXcd& a, double abs_tol) {
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(a);
    const Eigen::Index m = std::min(a.rows(), a.cols());
    Eigen::Index r = 0;
    while (r < m && std::abs(qr.matrixQR()(r, r)) > abs_tol) ++r;
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(a.rows(), r);
    return q;
}

}  // namespace lsd
