#pragma once

#include "lsd/linalg.hpp"
#include "lsd/operator.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lsd {

enum class SpectralClass { ContinuumArc, IsolatedReal, Resonance, Unclassified };
const char* to_string(SpectralClass c);

struct Rectangle {
    double center = 0.0;       // lambda_0
    double half_width = 0.0;   // rho
    double depth_slope = 0.0;  // sigma

    Rectangle(double center, double half_width, double depth_slope);
    bool contains(cplx z, cplx theta) const;
};

struct RectangleStats {
    std::vector<int> inside;   // eigenvalue indices inside the rectangle
    std::vector<int> matched;  // inside and within match_tol of an excluded value
    std::vector<int> strays;   // inside and unmatched
    std::size_t stray_count() const { return strays.size(); }
};

struct SpectrumReport {
    VectorXcd eigenvalues;
    std::vector<double> residuals;
    std::vector<bool> flagged;
    std::vector<SpectralClass> classes;
    std::vector<double> curve_distance;
    MatrixXcd vectors;  // kept on request
    cplx theta = 0.0;
    CPoint xi;
    MomentumGrid grid;
    double norm_estimate = 0.0;
    double eig_tol = 1e-8;
    std::optional<RectangleStats> rectangle_stats;

    std::size_t size() const { return std::size_t(eigenvalues.size()); }
    std::size_t flagged_count() const;
    std::size_t count(SpectralClass c) const;
    std::string file_stem() const;
    void write_csv(const std::string& path) const;
    nlohmann::json summary() const;
};

SpectrumReport eigendecompose(const FiberOperator& op, double eig_tol = 1e-8, bool keep_vectors = false);

struct ClassifierOptions {
    double imag_tol = 1e-6;
    double arc_abs = 1e-3;
    double arc_rel = 0.1;      // times |Im| of the nearest curve point
    double arc_segment = 0.5;  // times the local curve segment length
    double match_tol = 1e-6;
    double refine_tol = 1e-6;  // displacement under refinement below which a value counts as stable
};

// Tags eigenvalues against the free curve omega_xi(gamma(k_i)) stored in op.multiplication;
// with a refined report (N -> 2N), unstable values are continuum-arc regardless of the curve.
void classify(SpectrumReport& report, const FiberOperator& op, const ClassifierOptions& opt = {},
              const SpectrumReport* refined = nullptr);

double distance_to_polyline(cplx z, const VectorXcd& curve, double* segment_length = nullptr, cplx* nearest = nullptr);

struct SectorReport {
    std::size_t violations = 0;
    double worst_margin = 0.0;  // min of 4C|theta|(|Re|+1) - |Im|
    std::vector<int> violators;
};

SectorReport sector_check(const SpectrumReport& report, double C, cplx theta, double slack = 0.0);

RectangleStats rectangle_scan(const SpectrumReport& report, const Rectangle& rect, const std::vector<cplx>& exclude,
                              double match_tol);

// The in-rectangle isolated-real value closest to the rectangle centre.
std::optional<cplx> isolated_in_rectangle(const SpectrumReport& report, const Rectangle& rect);

struct DriftRow {
    cplx theta_from = 0.0, theta_to = 0.0;
    double max_isolated_drift = 0.0;
    std::size_t isolated_tracked = 0;
    double median_continuum_drift = 0.0;
    std::size_t continuum_tracked = 0;
};

struct DriftTable {
    std::vector<DriftRow> rows;
    double max_isolated_drift() const;
    double min_median_continuum_drift() const;
};

// Greedy nearest-neighbour matching of in-rectangle isolated-real values across consecutive reports;
// continuum drift is measured on continuum-arc values with |Re - center| <= window.
DriftTable theta_independence(const std::vector<const SpectrumReport*>& reports, const Rectangle& rect, double match_tol,
                              double continuum_window);

struct RieszProjection {
    MatrixXcd P;
    cplx center = 0.0;
    double radius = 0.0;
    int nodes = 0;
    int rank = 0;
    double idempotency_defect = 0.0;  // Frobenius norm of P^2 - P
};

// Trapezoid rule for (1/2 pi i) int (z - H)^{-1} dz on a circle. known_spectrum (if empty, computed)
// is used for the separation check.
RieszProjection riesz_projection(const FiberOperator& op, cplx center, double radius, int nodes = 64,
                                 const VectorXcd* known_spectrum = nullptr);
RieszProjection riesz_projection_serial(const FiberOperator& op, cplx center, double radius, int nodes = 64,
                                        const VectorXcd* known_spectrum = nullptr);

// Same contour on a precomputed Schur form; each node costs one triangular inverse.
RieszProjection riesz_projection(const SchurForm& schur, cplx center, double radius, int nodes = 64);
RieszProjection riesz_projection_serial(const SchurForm& schur, cplx center, double radius, int nodes = 64);

// Applies the contour projection to a block of vectors.
MatrixXcd riesz_apply(const SchurForm& schur, cplx center, double radius, int nodes, const MatrixXcd& block);
MatrixXcd riesz_apply(const MatrixXcd& H, cplx center, double radius, int nodes, const MatrixXcd& block);

// Rank of the projection via a randomized range probe (cheaper than the full P).
int riesz_rank_probe(const SchurForm& schur, cplx center, double radius, int nodes = 64, int probes = 6,
                     std::uint64_t seed = 3);
int riesz_rank_probe(const MatrixXcd& H, cplx center, double radius, int nodes = 64, int probes = 6,
                     std::uint64_t seed = 3);

// Number of eigenvalues of P within 1e-6 of 1 (P restricted to its numerical range).
int projection_rank(const MatrixXcd& P);

class FeshbachReduction {
public:
    // basis: N x n0 with orthonormal columns spanning Ran P0.
    FeshbachReduction(const MatrixXcd& H, const MatrixXcd& basis);

    MatrixXcd map(cplx z) const;
    cplx det(cplx z) const;
    int winding_number(cplx center, double radius, int nodes = 128) const;
    int rank() const { return int(b11_.rows()); }

private:
    MatrixXcd b11_, b12_, b21_;
    SchurForm b22_;
    double scale_ = 1.0;
};

// Riesz projection at mu, its rank under contour perturbations, and the Feshbach determinant on
// the projection's range at mu, at four probes mu +- offset, +- i offset, and its winding number.
struct FeshbachAnalysis {
    struct Contour {
        cplx center = 0.0;
        double radius = 0.0;
        int nodes = 0;
        int rank = 0;
    };
    cplx mu = 0.0;
    int rank = 0;
    double idempotency_defect = 0.0;
    std::vector<Contour> perturbed;  // 2x nodes, radius x0.9 and x1.1, shifted and widened
    double abs_det_at_mu = 0.0;
    std::vector<std::pair<cplx, double>> probes;
    int winding_number = 0;
    double aps = 0.0;

    bool rank_stable() const;
    double min_probe() const;
    nlohmann::json to_json() const;
};

FeshbachAnalysis feshbach_analysis(const MatrixXcd& H, cplx mu, double radius, int nodes, double probe_offset);

double aps_probe(const FiberOperator& op, cplx lambda, int n_vectors = 2, int max_iter = 300);
double aps_probe(const MatrixXcd& H, cplx lambda, int n_vectors = 2, int max_iter = 300);

}  // namespace lsd
