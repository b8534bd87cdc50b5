#pragma once

#include "lsd/linalg.hpp"
#include "lsd/operator.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace lsd {

// i[H(xi), A_{xi0}] on the momentum grid.
struct CommutatorMatrix {
    MatrixXcd matrix;
    VectorXd multiplication;  // v_{xi0}(k_i) . grad omega_xi(k_i)
    MatrixXcd potential_part;
    MomentumGrid grid;
    CPoint xi, xi0;

    double hermitian_defect() const;
    double norm() const;  // spectral norm (Hermitian eigenvalues)
};

CommutatorMatrix assemble_commutator(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                                     const CPoint& xi, const CPoint& xi0);

// g_xi(k) = e^{-k^2 - xi^2} |grad omega_xi(k)|^2 at real k.
double mourre_symbol(const DispersionPair& pair, const CPoint& xi, double k);

struct MourreOptions {
    double shell_step = 1e-3;    // sampling step of the energy shell
    double min_threshold_distance = 1e-8;
    std::vector<double> point_spectrum;  // known eigenvalues of H(xi), for the K-free flag
    bool compact_norm = true;            // assemble the commutator for ||K||
};

struct MourreReport {
    double lambda = 0.0;
    double xi = 0.0;
    double e = 0.0;
    double kappa = 0.0;
    double c_upper = 0.0;
    double compact_norm = 0.0;
    double threshold_distance = 0.0;
    double e_argmin = 0.0;  // k attaining e on the sampled shell
    double c_argmax = 0.0;
    std::size_t shell_samples = 0;
    bool k_free = true;
    std::vector<double> virial_residuals;

    nlohmann::json to_json() const;
};

MourreReport extract_constants(const MomentumGrid& grid, const DispersionPair& pair, const PotentialSpec& potential,
                               double lambda, const CPoint& xi, const std::vector<double>& thresholds,
                               const MourreOptions& opt = {}, const CommutatorMatrix* commutator = nullptr);

std::vector<double> virial_check(const CommutatorMatrix& c, const MatrixXcd& eigenvectors);

struct MourreMargin {
    double margin = 0.0;  // smallest eigenvalue of S
    double e = 0.0, c = 0.0, kappa = 0.0;
    std::size_t window_states = 0;
    bool with_p0 = false;
};

// S = i[H,A] - e + C (E_H(|H - lambda| > kappa) <H> + P0).
MourreMargin mourre_inequality_check(const CommutatorMatrix& c, const MatrixXcd& H, const MourreReport& report,
                                     const MatrixXcd* p0_basis = nullptr, std::optional<double> e_override = {});

}  // namespace lsd
