#pragma once

#include "lsd/flow.hpp"
#include "lsd/grid.hpp"
#include "lsd/potential.hpp"

#include <optional>
#include <string>

namespace lsd {

struct AssemblyOptions {
    double tail_tolerance = 1e-10;  // relative to C_V (or to max |Vhat| on the grid)
    std::optional<double> c_v;
};

struct FiberOperator {
    MatrixXcd matrix;
    VectorXcd multiplication;  // omega_xi(gamma(k_i)), the non-kernel diagonal part
    MomentumGrid grid;
    CPoint xi;
    cplx theta = 0.0;
    std::string grid_id;
    std::string potential_id;
    double tail_tolerance = 0.0;
    double tail_ratio = 0.0;  // |Vhat(2K)| / scale observed at assembly
    double norm_estimate = 0.0;

    Eigen::Index size() const { return matrix.rows(); }
    MatrixXcd kernel_part() const;  // matrix minus diag(multiplication)
};

// Deformation parameter theta and the admissible radius R = min{r, a'/(C+1), pi/(dC'+1)}.
struct DeformationParams {
    cplx theta = 0.0;
    double admissible_R = 0.0;
    double c_omega = 0.0;  // when positive, enforces 2 C_omega |theta| < a'
};

double admissible_R(const FieldBounds& b, double strip_radius, double a_prime, int dim);

// Kernel prefactor (2 pi)^{-d/2} dk^d.
double kernel_weight(const MomentumGrid& grid);

FiberOperator assemble_H(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                         const CPoint& xi, const AssemblyOptions& opt = {});

// The deformation with parameter theta uses the flow table at time -theta.
cplx deformation_flow_time(cplx theta);
FlowTable build_deformation_table(const MomentumGrid& grid, const FlowProblem& prob, cplx theta);

FiberOperator assemble_H_theta(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                               const CPoint& xi, const FlowTable& table, const DeformationParams& params,
                               const AssemblyOptions& opt = {});

// Kernel fill kernels: out_ij = w s_i Vhat(g_j - g_i) s_j + delta_ij diag_i.
void fill_dilated_matrix(MatrixXcd& out, const PotentialSpec& potential, const std::vector<cplx>& gamma,
                         const std::vector<cplx>& s, const VectorXcd& diag, double w);
void fill_dilated_matrix_serial(MatrixXcd& out, const PotentialSpec& potential, const std::vector<cplx>& gamma,
                                const std::vector<cplx>& s, const VectorXcd& diag, double w);

struct KernelNormReport {
    double norm = 0.0;
    double bound = 0.0;
    double c_d = 0.0;
    bool ok() const { return norm <= bound; }
};

// C_d = int (1 + |k|^{d'})^{-1} dk over R^d.
double c_d_integral(int dim, int d_prime);

KernelNormReport dilated_kernel_norm_check(const FiberOperator& op, const FieldBounds& bounds, const FourierKernel& kernel);

struct RelativeBoundReport {
    double w_norm = 0.0;  // ||W_theta (H + i)^{-1}||
    double bound = 0.0;   // (3C/2)|theta|
    double ratio_min = 0.0, ratio_max = 0.0;  // ||psi||_{H_theta} / ||psi||_H
    int samples = 0;
    bool ok() const { return w_norm <= bound && ratio_min >= 0.5 && ratio_max <= 2.0; }
};

RelativeBoundReport relative_bound_check(const FiberOperator& op_theta, const FiberOperator& op_0, double C,
                                         int samples = 100, std::uint64_t seed = 11);

// ||B (H + i)^{-1}|| for Hermitian H, via power iteration.
double resolvent_weighted_norm(const MatrixXcd& B, const MatrixXcd& H, std::uint64_t seed = 5);

struct ConjugationReport {
    double defect = 0.0;  // max |conj(M(theta)) - M(conj theta)|
    double tolerance = 0.0;
    bool applicable = true;
    bool ok() const { return defect <= tolerance; }
};

enum class ConjugationMode { Strict, Diagnostic };

ConjugationReport conjugation_check(const FiberOperator& op_theta, const FiberOperator& op_conj, bool potential_even,
                                    ConjugationMode mode = ConjugationMode::Strict);

double adjoint_defect(const FiberOperator& op_theta, const FiberOperator& op_conj);

// Binary layout: "LSDMAT01", uint64 N, uint64 d, uint64 row_major(=1), N*N (re, im) float64 little-endian.
void write_matrix_binary(const MatrixXcd& m, int dim, const std::string& path);
MatrixXcd read_matrix_binary(const std::string& path);

}  // namespace lsd
