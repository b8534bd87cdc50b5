#pragma once

#include "lsd/common.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lsd {

inline constexpr int kSchemaVersion = 1;

struct DispersionConfig {
    std::string family = "even_polynomial";  // even_polynomial | relativistic | quartic | zero
    std::vector<double> coefficients{0.0, 1.0};
    double exponent = 0.5;
    double strip_radius = 0.5;
    double growth_exponent = 2.0;
    double growth_constant = 10.0;
};

struct PotentialConfig {
    std::string family = "zero";  // zero | gaussian | bump | embedded | sampled
    double amplitude = 0.0;
    double b = 0.5;
    double odd_amplitude = 0.0;
    double radius = 1.0;
    double decay_rate = 4.0;
    double a_prime = 0.0;
    std::string method = "closed_form";
    // embedded
    double xi0 = 1.0;
    double bump_radius = 4.0;
    double bump_amplitude = 1.0;
    double spacing = 0.005;
    double half_width = 12.0;
    // sampled
    std::string csv, manifest;
};

struct RectangleConfig {
    bool present = false;
    std::optional<double> center, half_width, depth_slope;  // empty means "auto"
};

struct SweepConfig {
    bool present = false;
    std::string parameter = "xi";  // xi | xi0
    double from = 0.0, to = 0.0;
    int points = 0;
    std::vector<double> values() const;
};

struct Tolerances {
    double eig_tol = 1e-8;
    double tail_tolerance = 1e-10;
    double flow_tol = 1e-12;
    double match_tol = 1e-6;
    double newton_tol = 1e-10;
    double drift_tol = 1e-5;
    double residual_tol = 1e-6;
    double mourre_margin = 1e-8;
    double series_tol = 1e-10;
    double band_lipschitz = 4.0;
};

struct CertifyConfig {
    double resolution = 0.05;
    double k_extent = 8.0;
    int sample_count = 2000;
    int theta_samples = 8;
    int d_prime = 0;  // 0: smoothness order
};

struct MourreConfig {
    double lambda = 1.0;
    double shell_step = 1e-3;
};

struct FeshbachConfig {
    std::optional<double> mu;  // empty: the in-rectangle isolated eigenvalue
    double contour_radius = 0.05;
    double probe_offset = 0.1;
    int nodes = 64;
};

struct CommlabConfig {
    int n = 40;
    int seeds = 50;
    std::uint64_t first_seed = 1;
    int k_max = 60;
    double radius_fraction = 0.9;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string name = "scenario";
    DispersionConfig first, second;
    PotentialConfig potential;
    double K = 12.0;
    int N = 801;
    int d = 1;
    std::vector<cplx> theta{cplx(0.0, 0.1)};
    std::vector<double> xi{0.0};
    SweepConfig sweep;
    RectangleConfig rectangle;
    Tolerances tol;
    CertifyConfig certify;
    MourreConfig mourre;
    FeshbachConfig feshbach;
    CommlabConfig commlab;
    std::string output;
    std::uint64_t seed = 7;

    nlohmann::json canonical;  // fully populated, defaults included
    std::string hash() const;
};

// key.path=value, value parsed as JSON when possible.
void apply_override(nlohmann::json& raw, const std::string& assignment);

Scenario parse_scenario(const nlohmann::json& raw);
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

// Resolves the run directory: explicit flag, else scenario output, relative paths under LSD_OUTPUT_ROOT (default "runs").
std::string resolve_output_dir(const Scenario& s, const std::string& flag);

}  // namespace lsd
