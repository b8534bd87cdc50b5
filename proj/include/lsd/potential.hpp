#pragma once

#include "lsd/common.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace lsd {

enum class PotentialFamily { Zero, Gaussian, Bump, Sampled };
enum class FourierMethod { ClosedForm, Quadrature };

// V sampled on a uniform position grid x_m = x0 + m h (Example 1.1 construction).
struct SampledPotential {
    double x0 = 0.0, h = 0.0;
    std::vector<double> V, u;
    double xi0 = 0.0, rho = 0.0, bump_amplitude = 1.0;
    std::size_t first_nonzero = 0, last_nonzero = 0;

    double x(std::size_t m) const { return x0 + double(m) * h; }
    void index_support();
};

struct PotentialSpec {
    PotentialFamily family = PotentialFamily::Zero;
    int dim = 1;
    double amplitude = 0.0;      // gaussian / bump
    double b = 0.5;              // gaussian: amplitude * exp(-b |x|^2)
    double odd_amplitude = 0.0;  // gaussian, d = 1: adds odd_amplitude * x * exp(-b x^2)
    double radius = 1.0;         // bump support radius
    double decay_rate = 4.0;     // a
    double a_prime = 0.0;        // strip for Vhat; 0 means a / 2
    FourierMethod method = FourierMethod::ClosedForm;
    std::shared_ptr<const SampledPotential> sampled;
    std::string id;

    static PotentialSpec zero(int dim = 1);
    static PotentialSpec gaussian(double amplitude, double b, int dim = 1);
    static PotentialSpec bump(double amplitude, double radius);

    void validate() const;
    int smoothness_order() const { return 2 * (dim / 2) + 2; }
    double strip() const { return a_prime > 0.0 ? a_prime : decay_rate / 2.0; }
    bool is_even() const;
    bool is_zero() const;
    double value(double x) const;  // d = 1
    std::string describe() const;
};

// Unitary convention: Vhat(k) = (2 pi)^{-d/2} int e^{-i k.x} V(x) dx.
cplx fourier_transform(const PotentialSpec& spec, const CPoint& k);
cplx fourier_transform(const PotentialSpec& spec, cplx k);  // d = 1
// Transform of x V(x) (d = 1); d/dk Vhat = -i * moment_transform.
cplx moment_transform(const PotentialSpec& spec, cplx k);

// (2 pi)^{-1/2} h sum_m g(x_m) e^{-i k x_m} over the stored samples.
cplx sampled_transform(const SampledPotential& s, cplx k, bool moment);
// Adaptive quadrature evaluation regardless of spec.method (gaussian / bump).
cplx quadrature_transform(const PotentialSpec& spec, cplx k, bool moment = false);

struct FourierKernel {
    PotentialSpec spec;
    double c_v = 0.0;      // inflated
    double raw_c_v = 0.0;
    double a_prime = 0.0;
    int d_prime = 2;
    double inflation = 1.25;

    cplx operator()(cplx k) const { return fourier_transform(spec, k); }
    double bound(const CPoint& k) const;
};

std::vector<CPoint> strip_sample(int dim, double a_prime, double re_extent, std::size_t count, std::uint64_t seed);

FourierKernel certify_decay(const PotentialSpec& spec, double a_prime, const std::vector<CPoint>& sample,
                            int d_prime = 0, double inflation = 1.25);

// max over a position grid and |alpha| <= d' of e^{a|x|} |d^alpha V(x)| (finite differences).
double smoothness_sup(const PotentialSpec& spec, double extent, double h);

struct BumpParams {
    double amplitude = 1.0;
    double radius = 3.0;
    double value(double x) const;
    double second_derivative(double x) const;
};

struct PositionGrid {
    double half_width = 8.0;
    double spacing = 0.005;
};

struct EmbeddedConstruction {
    PotentialSpec spec;
    double target = 0.0;    // xi0^2
    double residual = 0.0;  // ||(D^4 + V)u - xi0^2 u|| / ||u|| on the grid interior
    int residual_stride = 1;
};

EmbeddedConstruction construct_embedded(double xi0, const BumpParams& f, const PositionGrid& grid,
                                        double decay_rate = 4.0);

// Discrete residual of (d^4/dx^4 + V) u = xi0^2 u using a 9-point stencil of step stride*h.
double embedded_residual(const SampledPotential& s, int stride);

void save_sampled(const SampledPotential& s, const std::string& csv_path, const std::string& manifest_path);
std::shared_ptr<SampledPotential> load_sampled(const std::string& csv_path, const std::string& manifest_path);

}  // namespace lsd
