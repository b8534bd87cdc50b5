#pragma once

#include "lsd/common.hpp"

#include <vector>

namespace lsd {

enum class DispersionFamily { EvenPolynomial, Relativistic, Quartic };

// A single-particle dispersion omega_j(k) = p(k.k), with p one of the
// closed-form families below. k.k is the analytic square.
struct DispersionSpec {
    DispersionFamily family = DispersionFamily::EvenPolynomial;
    // EvenPolynomial: p(q) = sum_m coefficients[m] q^m.
    // Quartic: p(q) = q^2 + coefficients[1] q + coefficients[0] (missing entries are 0).
    std::vector<double> coefficients;
    double exponent = 0.5;  // Relativistic: p(q) = (1 + q)^exponent
    int dim = 1;
    double strip_radius = 0.5;
    double growth_exponent = 2.0;
    double growth_constant = 10.0;

    static DispersionSpec even_polynomial(std::vector<double> coeffs, int dim = 1, double strip = 0.5);
    static DispersionSpec relativistic(double s, int dim = 1, double strip = 0.25);
    static DispersionSpec quartic(double c0 = 0.0, double c1 = 0.0, int dim = 1, double strip = 0.5);
    static DispersionSpec zero(int dim = 1, double strip = 0.5);

    void validate() const;
    bool is_constant() const;
};

struct DispersionPair {
    DispersionSpec first;   // omega_1, evaluated at xi - k
    DispersionSpec second;  // omega_2, evaluated at k

    int dim() const { return second.dim; }
    double strip_radius() const;  // common strip R~ (minimum of the two)
    void validate() const;
};

// Radial profile p and its first two derivatives in q.
struct RadialDerivs {
    cplx p, dp, d2p;
};
RadialDerivs radial_profile(const DispersionSpec& spec, cplx q);

cplx eval_omega(const DispersionSpec& spec, const CPoint& k);
cplx eval_omega(const DispersionPair& pair, int j, const CPoint& k);
CPoint grad_omega(const DispersionSpec& spec, const CPoint& k);
CSmallMat hessian_omega(const DispersionSpec& spec, const CPoint& k);

cplx omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k);
CPoint grad_omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k);
CSmallMat hessian_omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k);

CPoint vector_field(const DispersionPair& pair, const CPoint& xi, const CPoint& k);
CSmallMat jacobian_v(const DispersionPair& pair, const CPoint& xi, const CPoint& k);
cplx divergence_v(const DispersionPair& pair, const CPoint& xi, const CPoint& k);

// Vector field and divergence from one set of evaluations, used by the flow integrator.
struct FieldSample {
    CPoint v;
    cplx div;
};
FieldSample field_and_divergence(const DispersionPair& pair, const CPoint& xi, const CPoint& k);

struct FieldBounds {
    double c_omega = 0.0;        // inflated sup |v_xi|
    double c_omega_prime = 0.0;  // inflated sup ||Dv_xi||
    double raw_c_omega = 0.0;
    double raw_c_omega_prime = 0.0;
    double certified_on = 0.0;   // sampling resolution
    double strip = 0.0;          // imaginary half-width sampled
    double inflation = 1.25;
};

struct BoundsRequest {
    RPoint xi_lo, xi_hi;      // real box of total momenta
    double strip = 0.0;       // |Im k_i| <= strip
    double resolution = 0.05;
    double k_extent = 8.0;    // |Re k_i| <= k_extent; v decays like exp(-|k|^2)
    double inflation = 1.25;
};

FieldBounds certify_bounds(const DispersionPair& pair, const BoundsRequest& req);

struct GrowthReport {
    double worst_lower_margin = 0.0;  // min of |omega| - (C^-1 <k>^s - C)
    double worst_upper_margin = 0.0;  // min of C <k>^s - max(|omega|, |grad omega|)
    std::size_t samples = 0;
    bool ok() const { return worst_lower_margin >= 0.0 && worst_upper_margin >= 0.0; }
};

// Checks the two-sided growth bound on a (Re, Im) sample grid of the strip.
GrowthReport check_growth(const DispersionSpec& spec, double re_extent, double resolution);

}  // namespace lsd
