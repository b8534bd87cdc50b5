#pragma once

#include "lsd/mourre.hpp"
#include "lsd/scenario.hpp"
#include "lsd/spectra.hpp"
#include "lsd/thresholds_bands.hpp"

#include <json.hpp>

#include <map>
#include <optional>

namespace lsd {

DispersionSpec make_dispersion(const DispersionConfig& c);

// Builds V; the embedded family runs the construction (xi0 taken from the override when given).
PotentialSpec make_potential(const PotentialConfig& c, std::optional<double> xi0 = std::nullopt,
                             EmbeddedConstruction* info = nullptr);

struct Constants {
    double c_omega = 0.0, c_omega_prime = 0.0;
    double c_v = 0.0;
    double a_prime = 0.0;
    double strip = 0.0;  // R~
    double R = 0.0;      // min{R~/(C_omega+1), a'/(C_omega+1), pi/(d C'_omega+1)}
    double M = 0.0;      // sup over sampled |theta| = 0.9 R of ||H_theta (H+i)^{-1}||
    double C = 0.0;      // max{1, M}/R
    double r_prime = 0.0;
    std::vector<double> m_samples;

    nlohmann::json to_json() const;
};

class Pipeline {
public:
    explicit Pipeline(Scenario s);

    const Scenario& scenario() const { return s_; }
    const DispersionPair& pair() const { return pair_; }
    MomentumGrid grid() const { return {s_.K, s_.N, s_.d}; }
    AssemblyOptions assembly_options() const;

    const PotentialSpec& potential();
    const std::optional<EmbeddedConstruction>& embedded();

    const FieldBounds& bounds();
    double admissible_radius();
    FlowProblem flow_problem(double xi);

    FiberOperator assemble(double xi, cplx theta);
    FiberOperator assemble(double xi, cplx theta, const PotentialSpec& V);

    // Values of the sweep block when its parameter is xi, else the xi list.
    std::vector<double> xi_values() const;

    FourierKernel kernel();
    const Constants& constants(bool with_M = true);

    ThresholdSet thresholds(double xi);
    MourreReport mourre(double xi, double lambda, bool compact_norm = true);
    Rectangle rectangle(double xi);

    // Fibers along the sweep block at theta.front(): the xi parameter moves the fiber, xi0 rebuilds
    // the embedded potential at the fixed fiber xi.front().
    BandFactory band_factory();
    BandOptions band_options() const;

private:
    Scenario s_;
    DispersionPair pair_;
    std::optional<PotentialSpec> potential_;
    std::optional<EmbeddedConstruction> embedded_;
    std::optional<FieldBounds> bounds_;
    std::optional<FourierKernel> kernel_;
    std::optional<Constants> constants_;
    bool have_M_ = false;
};

}  // namespace lsd
