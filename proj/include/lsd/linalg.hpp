#pragma once

#include "lsd/common.hpp"

#include <cstdint>
#include <functional>

namespace lsd {

struct EigenSystem {
    VectorXcd values;
    MatrixXcd vectors;  // right eigenvectors, unit 2-norm columns; empty if not requested
};

// General complex eigenproblem (LAPACK zgeev). ConvergenceFailure if QR iteration stalls.
EigenSystem eig_general(const MatrixXcd& a, bool vectors = true);

// Complex Schur form a = U T U^H with T upper triangular (LAPACK zgees).
struct SchurForm {
    MatrixXcd U;
    MatrixXcd T;
    VectorXcd values() const { return T.diagonal(); }
    // (T - z)^{-1}, upper triangular (LAPACK ztrtri); SolveFailure if a diagonal entry of T - z vanishes.
    MatrixXcd shifted_inverse(cplx z) const;
    // (a - z)^{-1} b through two unitary products and one triangular solve.
    MatrixXcd shifted_solve(cplx z, const MatrixXcd& b) const;
};
SchurForm schur_form(const MatrixXcd& a);

// Hermitian eigenproblem, ascending eigenvalues.
struct HermitianSystem {
    VectorXd values;
    MatrixXcd vectors;
};
HermitianSystem eig_hermitian(const MatrixXcd& a, bool vectors = true);

double max_row_sum(const MatrixXcd& a);
double hermitian_defect(const MatrixXcd& a);  // max |a_ij - conj(a_ji)|

VectorXcd random_unit_vector(Eigen::Index n, std::uint64_t seed);
MatrixXcd random_block(Eigen::Index n, Eigen::Index cols, std::uint64_t seed);

using LinearMap = std::function<VectorXcd(const VectorXcd&)>;

// Largest singular value of B by power iteration on B^H B.
double power_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index n, std::uint64_t seed = 7,
                  int max_iter = 500, double rel_tol = 1e-12);

// Orthonormal basis of the column span (Householder QR with column pivoting); columns whose
// pivot falls below abs_tol are dropped.
MatrixXcd orthonormal_range(const MatrixXcd& a, double abs_tol);

}  // namespace lsd
