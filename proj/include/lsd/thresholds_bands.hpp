#pragma once

#include "lsd/spectra.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsd {

// Critical points and values of omega_xi (d = 1).
struct ThresholdSet {
    double xi = 0.0;
    std::vector<double> critical_points;
    std::vector<double> critical_values;
    double newton_tol = 1e-10;
    std::size_t dropped_seeds = 0;

    double distance(double lambda) const;
    bool hits(double lo, double hi) const;
};

ThresholdSet threshold_set(const DispersionPair& pair, double xi, const std::vector<double>& seeds,
                           double newton_tol = 1e-10, int max_iter = 200);

void write_thresholds_csv(const std::vector<ThresholdSet>& sets, const std::string& path);

struct BandSample {
    double xi = 0.0;
    cplx lambda = 0.0;
    int multiplicity = 0;
    double residual = 0.0;
    bool near_threshold = false;
};

struct Branch {
    int id = 0;
    std::vector<BandSample> samples;
    std::vector<int> xi_index;
};

struct BandData {
    std::vector<double> xi_grid;
    std::vector<Branch> branches;
    double matching_tol = 1e-6;
    double band_lipschitz = 4.0;
    std::vector<int> gaps;  // xi indices where a branch was lost or a match was ambiguous

    void write_csv(const std::string& path) const;
};

// What a sweep needs at one grid value.
struct BandInput {
    FiberOperator op;
    ThresholdSet thresholds;
    std::optional<Rectangle> rect;  // overrides the sweep rectangle
};
using BandFactory = std::function<BandInput(double xi)>;

struct BandOptions {
    double matching_tol = 1e-6;
    double band_lipschitz = 4.0;
    double near_threshold = 1e-2;
    bool throw_on_ambiguity = false;
    int riesz_nodes = 64;
    double riesz_radius = 0.05;
    ClassifierOptions classifier;
};

BandData band_sweep(const BandFactory& factory, const std::vector<double>& xi_grid, const Rectangle& rect,
                    const BandOptions& opt = {});

struct FitReport {
    int branch_id = 0;
    std::vector<double> residuals;  // max abs residual for degree 0..degree
    std::optional<double> meeting_point;
    int puiseux_order = 0;  // best l in {1,2,3}; 0 when no meeting point
    std::vector<double> puiseux_residuals;
};

// Max abs residual of the least-squares polynomial fit of the given degree.
double polynomial_fit_residual(const std::vector<double>& x, const std::vector<double>& y, int degree);

// Fits y = c0 + c1 u + c2 u^2 with u = |x - x0|^{1/l}; returns the residuals for l = 1, 2, 3.
std::vector<double> puiseux_residuals(const std::vector<double>& x, const std::vector<double>& y, double x0);

FitReport branch_regularity(const BandData& band, int branch_id, int degree,
                            std::optional<double> meeting_point = std::nullopt);

}  // namespace lsd
