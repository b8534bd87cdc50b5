#pragma once

#include "lsd/linalg.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lsd {

struct MatrixPair {
    MatrixXcd H, A;
    std::string provenance;

    Eigen::Index size() const { return H.rows(); }
    void validate() const;  // Hermitian to 1e-14 * norm, n <= 200
};

// Entries standard complex normal, Hermitized by averaging with the adjoint.
MatrixPair random_pair(int n, std::uint64_t seed);
MatrixPair pauli_pair();  // H = sigma_x, A = sigma_z

// ad_0 = H, ad_{k+1} = ad_k A - A ad_k.
struct CommutatorLadder {
    std::vector<MatrixXcd> ad;
    std::vector<double> weighted_norms;  // ||ad_k (H+i)^{-1}||
    double growth_constant = 0.0;        // max_k (||ad_k (H+i)^{-1}|| / k!)^{1/k}

    double radius() const;  // R' = 1/(3C)
};

CommutatorLadder ladder(const MatrixPair& pair, int k_max);

// (H+i)^{-1} through the eigendecomposition of H.
MatrixXcd resolvent_at_minus_i(const MatrixXcd& H);
double spectral_norm(const MatrixXcd& m);

// e^{i theta A} H e^{-i theta A} from the eigendecomposition of A.
MatrixXcd exact_conjugation(const MatrixPair& pair, cplx theta);

struct SeriesResult {
    MatrixXcd matrix;
    double truncation_bound = 0.0;  // bound on ||tail (H+i)^{-1}||
};

// sum_{k <= k_max} (-theta)^k / k! i^k ad_k. RadiusExceeded if |theta| >= R'.
SeriesResult conjugate_series(const CommutatorLadder& lad, cplx theta, int k_max = -1);

struct WThetaReport {
    double actual = 0.0;  // ||(H_theta - H)(H+i)^{-1}||
    double bound = 0.0;   // C|theta| / (1 - C|theta|)
    double ratio() const { return bound > 0.0 ? actual / bound : 0.0; }
    bool holds() const { return actual <= bound * (1.0 + 1e-12) + 1e-14; }
};

WThetaReport w_theta_bound(const MatrixPair& pair, const CommutatorLadder& lad, cplx theta);

struct FiniteSectorReport {
    std::size_t violations = 0;
    double worst_margin = 0.0;
};

// Eigenvalues of e^{i theta A} H e^{-i theta A} against |Im| <= 4C|theta|(|Re| + 1).
FiniteSectorReport sector_bound_finite(const MatrixPair& pair, cplx theta, double C);

// e^{-A^2/(2m) + i theta A} psi.
VectorXcd gaussian_regularize(const MatrixPair& pair, const VectorXcd& psi, int m, cplx theta);

struct RegularizationReport {
    std::vector<int> m;
    std::vector<double> error;  // ||psi_m(theta) - e^{i theta A} psi||
    double loglog_slope = 0.0;
};

RegularizationReport regularization_convergence(const MatrixPair& pair, const VectorXcd& psi, double theta,
                                                const std::vector<int>& ms);

// ||S(theta)^H - S(conj theta)|| / ||S(theta)|| for the truncated series.
double series_adjoint_defect(const CommutatorLadder& lad, cplx theta, int k_max = -1);

struct GraphNormReport {
    double min_ratio = INFINITY, max_ratio = 0.0;
};

GraphNormReport graph_norm_check(const MatrixPair& pair, cplx theta, int samples, std::uint64_t seed);

// max over k <= k_max of ||k! b_k - (-i)^k ad_k psi|| / max(1, ||ad_k psi||), with b_k the
// Cauchy coefficients of theta -> H_theta psi on a circle of the given radius.
double contour_derivative_defect(const MatrixPair& pair, const CommutatorLadder& lad, const VectorXcd& psi,
                                 double radius, int k_max, int nodes = 64);

struct SeedResult {
    std::uint64_t seed = 0;
    double C = 0.0, r_prime = 0.0;
    double series_deviation = 0.0;
    double adjoint_defect = 0.0;
    double w_ratio = 0.0;
    std::size_t sector_violations = 0;
};

struct BatchOptions {
    int n = 40;
    int k_max = 60;
    double radius_fraction = 0.9;  // |theta| = fraction * R'
    double theta_arg = 1.5707963267948966;
};

std::vector<SeedResult> commlab_batch(const std::vector<std::uint64_t>& seeds, const BatchOptions& opt = {});
nlohmann::json batch_json(const std::vector<SeedResult>& results);

}  // namespace lsd
