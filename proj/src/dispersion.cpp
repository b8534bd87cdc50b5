#include "lsd/dispersion.hpp"

#include <cmath>
#include <functional>

namespace lsd {

DispersionSpec DispersionSpec::even_polynomial(std::vector<double> coeffs, int dim, double strip) {
    DispersionSpec s;
    s.family = DispersionFamily::EvenPolynomial;
    s.coefficients = std::move(coeffs);
    s.dim = dim;
    s.strip_radius = strip;
    int top = 0;
    for (std::size_t m = 0; m < s.coefficients.size(); ++m)
        if (s.coefficients[m] != 0.0) top = static_cast<int>(m);
    s.growth_exponent = 2.0 * top;
    return s;
}

DispersionSpec DispersionSpec::relativistic(double expo, int dim, double strip) {
    DispersionSpec s;
    s.family = DispersionFamily::Relativistic;
    s.exponent = expo;
    s.dim = dim;
    s.strip_radius = strip;
    s.growth_exponent = 2.0 * expo;
    return s;
}

DispersionSpec DispersionSpec::quartic(double c0, double c1, int dim, double strip) {
    DispersionSpec s;
    s.family = DispersionFamily::Quartic;
    s.coefficients = {c0, c1};
    s.dim = dim;
    s.strip_radius = strip;
    s.growth_exponent = 4.0;
    return s;
}

DispersionSpec DispersionSpec::zero(int dim, double strip) {
    auto s = even_polynomial({}, dim, strip);
    s.growth_exponent = 0.0;
    return s;
}

void DispersionSpec::validate() const {
    require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "dispersion dim must be in 1..3");
    require(strip_radius > 0.0, ErrorKind::InvalidArgument, "strip_radius must be positive");
    require(growth_constant > 0.0, ErrorKind::InvalidArgument, "growth_constant must be positive");
    require(growth_exponent >= 0.0, ErrorKind::InvalidArgument, "growth_exponent must be non-negative");
    for (double c : coefficients)
        require(std::isfinite(c), ErrorKind::InvalidArgument, "non-finite dispersion coefficient");
    if (family == DispersionFamily::Relativistic) {
        require(std::isfinite(exponent) && exponent > 0.0, ErrorKind::InvalidArgument,
                "relativistic exponent must be positive");
        require(strip_radius < 0.5 / std::sqrt(double(dim)), ErrorKind::InvalidArgument,
                "relativistic family needs strip_radius < d^{-1/2}/2");
    }
}

bool DispersionSpec::is_constant() const {
    if (family != DispersionFamily::EvenPolynomial) return false;
    for (std::size_t m = 1; m < coefficients.size(); ++m)
        if (coefficients[m] != 0.0) return false;
    return true;
}

double DispersionPair::strip_radius() const { return std::min(first.strip_radius, second.strip_radius); }

void DispersionPair::validate() const {
    first.validate();
    second.validate();
    require(first.dim == second.dim, ErrorKind::InvalidArgument, "dispersion dims differ");
}

RadialDerivs radial_profile(const DispersionSpec& spec, cplx q) {
    RadialDerivs r{0.0, 0.0, 0.0};
    switch (spec.family) {
    case DispersionFamily::EvenPolynomial: {
        // Horner for p, p', p''.
        const auto& c = spec.coefficients;
        for (std::size_t m = c.size(); m-- > 0;) {
            r.d2p = r.d2p * q + 2.0 * r.dp;
            r.dp = r.dp * q + r.p;
            r.p = r.p * q + c[m];
        }
        break;
    }
    case DispersionFamily::Quartic: {
        double c0 = spec.coefficients.size() > 0 ? spec.coefficients[0] : 0.0;
        double c1 = spec.coefficients.size() > 1 ? spec.coefficients[1] : 0.0;
        r.p = q * q + c1 * q + c0;
        r.dp = 2.0 * q + c1;
        r.d2p = 2.0;
        break;
    }
    case DispersionFamily::Relativistic: {
        const double s = spec.exponent;
        cplx base = 1.0 + q;
        cplx pw = std::pow(base, s);
        r.p = pw;
        r.dp = s * pw / base;
        r.d2p = s * (s - 1.0) * pw / (base * base);
        break;
    }
    }
    return r;
}

namespace {

void check_strip(const DispersionSpec& spec, const CPoint& k) {
    require(k.size() == spec.dim, ErrorKind::InvalidArgument, "point dimension mismatch");
    const double lim = 2.0 * spec.strip_radius;
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        if (!(std::abs(k[i].imag()) < lim))
            fail(ErrorKind::StripViolation, "|Im k| = " + fmt17(std::abs(k[i].imag())) +
                                                " outside strip of half-width " + fmt17(lim));
    }
}

}  // namespace

cplx eval_omega(const DispersionSpec& spec, const CPoint& k) {
    check_strip(spec, k);
    return radial_profile(spec, analytic_square(k)).p;
}

cplx eval_omega(const DispersionPair& pair, int j, const CPoint& k) {
    require(j == 1 || j == 2, ErrorKind::InvalidArgument, "particle index must be 1 or 2");
    return eval_omega(j == 1 ? pair.first : pair.second, k);
}

CPoint grad_omega(const DispersionSpec& spec, const CPoint& k) {
    check_strip(spec, k);
    return (2.0 * radial_profile(spec, analytic_square(k)).dp) * k;
}

CSmallMat hessian_omega(const DispersionSpec& spec, const CPoint& k) {
    check_strip(spec, k);
    auto r = radial_profile(spec, analytic_square(k));
    CSmallMat h = (4.0 * r.d2p) * (k * k.transpose());
    for (Eigen::Index i = 0; i < k.size(); ++i) h(i, i) += 2.0 * r.dp;
    return h;
}

cplx omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    return eval_omega(pair.first, CPoint(xi - k)) + eval_omega(pair.second, k);
}

CPoint grad_omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    return grad_omega(pair.second, k) - grad_omega(pair.first, CPoint(xi - k));
}

CSmallMat hessian_omega_xi(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    return hessian_omega(pair.second, k) + hessian_omega(pair.first, CPoint(xi - k));
}

CPoint vector_field(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    cplx w = std::exp(-analytic_square(k) - analytic_square(xi));
    return w * grad_omega_xi(pair, xi, k);
}

CSmallMat jacobian_v(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    cplx w = std::exp(-analytic_square(k) - analytic_square(xi));
    CPoint g = grad_omega_xi(pair, xi, k);
    CSmallMat h = hessian_omega_xi(pair, xi, k);
    // d/dk_b [w g_a] = w (H_ab - 2 k_b g_a)
    return w * (h - 2.0 * g * k.transpose());
}

cplx divergence_v(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    return jacobian_v(pair, xi, k).trace();
}

FieldSample field_and_divergence(const DispersionPair& pair, const CPoint& xi, const CPoint& k) {
    const CPoint km = xi - k;
    check_strip(pair.first, km);
    check_strip(pair.second, k);
    const cplx q2 = analytic_square(k), q1 = analytic_square(km);
    const auto r2 = radial_profile(pair.second, q2);
    const auto r1 = radial_profile(pair.first, q1);
    const cplx w = std::exp(-q2 - analytic_square(xi));
    const CPoint g = (2.0 * r2.dp) * k - (2.0 * r1.dp) * km;
    // trace of the Hessian of omega_1(xi-k) + omega_2(k)
    const double d = double(k.size());
    const cplx tr = 4.0 * r2.d2p * q2 + 2.0 * d * r2.dp + 4.0 * r1.d2p * q1 + 2.0 * d * r1.dp;
    cplx kg = 0.0;
    for (Eigen::Index i = 0; i < k.size(); ++i) kg += k[i] * g[i];
    return {w * g, w * (tr - 2.0 * kg)};
}

namespace {

double operator_norm(const CSmallMat& m) {
    if (m.rows() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<CSmallMat> svd(m);
    return svd.singularValues()(0);
}

// Uniform samples of [lo, hi] with spacing at most h, endpoints included.
std::vector<double> samples(double lo, double hi, double h) {
    if (hi <= lo) return {lo};
    int n = std::max(1, int(std::ceil((hi - lo) / h - 1e-12)));
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = lo + (hi - lo) * i / n;
    return out;
}

// Calls f with every point of the product grid axes[0] x axes[1] x ...
void product_grid(const std::vector<std::vector<double>>& axes, const std::function<void(const std::vector<double>&)>& f) {
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> pt(axes.size());
    while (true) {
        for (std::size_t a = 0; a < axes.size(); ++a) pt[a] = axes[a][idx[a]];
        f(pt);
        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
        if (a == axes.size()) return;
    }
}

}  // namespace

FieldBounds certify_bounds(const DispersionPair& pair, const BoundsRequest& req) {
    pair.validate();
    const int d = pair.dim();
    require(req.resolution > 0.0 && req.k_extent > 0.0, ErrorKind::InvalidArgument,
            "resolution and k_extent must be positive");
    require(req.strip >= 0.0, ErrorKind::InvalidArgument, "strip must be non-negative");
    require(req.xi_lo.size() == d && req.xi_hi.size() == d, ErrorKind::InvalidArgument, "xi box dimension mismatch");
    if (req.strip > pair.strip_radius())
        fail(ErrorKind::StripViolation, "sub-strip " + fmt17(req.strip) + " exceeds R~ = " + fmt17(pair.strip_radius()));

    std::vector<std::vector<double>> axes;
    for (int i = 0; i < d; ++i) axes.push_back(samples(req.xi_lo[i], req.xi_hi[i], req.resolution));
    for (int i = 0; i < d; ++i) axes.push_back(samples(-req.k_extent, req.k_extent, req.resolution));
    for (int i = 0; i < d; ++i) axes.push_back(samples(-req.strip, req.strip, req.resolution));

    double sup_v = 0.0, sup_dv = 0.0;
    CPoint xi(d), k(d);
    product_grid(axes, [&](const std::vector<double>& p) {
        for (int i = 0; i < d; ++i) {
            xi[i] = p[i];
            k[i] = cplx(p[d + i], p[2 * d + i]);
        }
        CPoint v = vector_field(pair, xi, k);
        CSmallMat dv = jacobian_v(pair, xi, k);
        double nv = v.norm(), ndv = operator_norm(dv);
        if (!std::isfinite(nv) || !std::isfinite(ndv)) fail(ErrorKind::NonFinite, "vector field diverges on sample set");
        sup_v = std::max(sup_v, nv);
        sup_dv = std::max(sup_dv, ndv);
    });

    FieldBounds b;
    b.raw_c_omega = sup_v;
    b.raw_c_omega_prime = sup_dv;
    b.c_omega = req.inflation * sup_v;
    b.c_omega_prime = req.inflation * sup_dv;
    b.certified_on = req.resolution;
    b.strip = req.strip;
    b.inflation = req.inflation;
    return b;
}

GrowthReport check_growth(const DispersionSpec& spec, double re_extent, double resolution) {
    spec.validate();
    const int d = spec.dim;
    const double c = spec.growth_constant, s = spec.growth_exponent;
    // stay strictly inside the open strip of half-width 2 R~
    const double im_max = 2.0 * spec.strip_radius * (1.0 - 1e-9);
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < d; ++i) axes.push_back(samples(-re_extent, re_extent, resolution));
    for (int i = 0; i < d; ++i) axes.push_back(samples(-im_max, im_max, resolution));
    GrowthReport rep;
    rep.worst_lower_margin = rep.worst_upper_margin = std::numeric_limits<double>::infinity();
    CPoint k(d);
    product_grid(axes, [&](const std::vector<double>& p) {
        for (int i = 0; i < d; ++i) k[i] = cplx(p[i], p[d + i]);
        double jk = std::pow(1.0 + k.squaredNorm(), s / 2.0);
        double w = std::abs(eval_omega(spec, k));
        double g = grad_omega(spec, k).norm();
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, w - (jk / c - c));
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, c * jk - std::max(w, g));
        ++rep.samples;
    });
    return rep;
}

}  // namespace lsd
