#include "lsd/potential.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace lsd {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

void SampledPotential::index_support() {
    first_nonzero = V.size();
    last_nonzero = 0;
    for (std::size_t m = 0; m < V.size(); ++m) {
        if (V[m] != 0.0) {
            first_nonzero = std::min(first_nonzero, m);
            last_nonzero = m;
        }
    }
}

PotentialSpec PotentialSpec::zero(int dim) {
    PotentialSpec s;
    s.dim = dim;
    s.id = "zero";
    return s;
}

PotentialSpec PotentialSpec::gaussian(double amplitude, double b, int dim) {
    PotentialSpec s;
    s.family = PotentialFamily::Gaussian;
    s.amplitude = amplitude;
    s.b = b;
    s.dim = dim;
    s.id = "gaussian(A=" + fmt17(amplitude) + ",b=" + fmt17(b) + ")";
    return s;
}

PotentialSpec PotentialSpec::bump(double amplitude, double radius) {
    PotentialSpec s;
    s.family = PotentialFamily::Bump;
    s.amplitude = amplitude;
    s.radius = radius;
    s.method = FourierMethod::Quadrature;
    s.id = "bump(A=" + fmt17(amplitude) + ",rho=" + fmt17(radius) + ")";
    return s;
}

void PotentialSpec::validate() const {
    require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "potential dim must be in 1..3");
    require(decay_rate > 0.0, ErrorKind::InvalidArgument, "decay rate a must be positive");
    require(a_prime >= 0.0 && a_prime < decay_rate, ErrorKind::InvalidArgument, "a' must lie in (0, a)");
    switch (family) {
    case PotentialFamily::Zero: break;
    case PotentialFamily::Gaussian:
        require(b > 0.0 && std::isfinite(amplitude), ErrorKind::InvalidArgument, "gaussian needs b > 0");
        require(odd_amplitude == 0.0 || dim == 1, ErrorKind::InvalidArgument, "odd part only in d = 1");
        break;
    case PotentialFamily::Bump:
        require(dim == 1 && radius > 0.0, ErrorKind::InvalidArgument, "bump potential needs d = 1, radius > 0");
        break;
    case PotentialFamily::Sampled:
        require(dim == 1 && sampled != nullptr, ErrorKind::InvalidArgument, "sampled potential needs data, d = 1");
        break;
    }
}

bool PotentialSpec::is_zero() const {
    return family == PotentialFamily::Zero || (family != PotentialFamily::Sampled && amplitude == 0.0 && odd_amplitude == 0.0);
}

bool PotentialSpec::is_even() const {
    switch (family) {
    case PotentialFamily::Zero:
    case PotentialFamily::Bump: return true;
    case PotentialFamily::Gaussian: return odd_amplitude == 0.0;
    case PotentialFamily::Sampled: {
        const auto& s = *sampled;
        // grid symmetric about 0 and V mirrored
        std::size_t n = s.V.size();
        if (n == 0) return true;
        if (std::abs(s.x(0) + s.x(n - 1)) > 1e-12 * std::max(1.0, std::abs(s.x0))) return false;
        for (std::size_t m = 0; m < n; ++m)
            if (std::abs(s.V[m] - s.V[n - 1 - m]) > 1e-12 * (1.0 + std::abs(s.V[m]))) return false;
        return true;
    }
    }
    return false;
}

double BumpParams::value(double x) const {
    double s = x / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - s * s));
}

double BumpParams::second_derivative(double x) const {
    double s = x / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    double w = 1.0 - s * s;
    double phi1 = -2.0 * s / (w * w);
    double phi2 = -(2.0 + 6.0 * s * s) / (w * w * w);
    return amplitude * std::exp(-1.0 / w) * (phi1 * phi1 + phi2) / (radius * radius);
}

double PotentialSpec::value(double x) const {
    switch (family) {
    case PotentialFamily::Zero: return 0.0;
    case PotentialFamily::Gaussian: return (amplitude + odd_amplitude * x) * std::exp(-b * x * x);
    case PotentialFamily::Bump: return BumpParams{amplitude, radius}.value(x);
    case PotentialFamily::Sampled: {
        const auto& s = *sampled;
        double t = (x - s.x0) / s.h;
        if (t < 0 || t > double(s.V.size() - 1)) return 0.0;
        std::size_t m = std::min(std::size_t(t), s.V.size() - 2);
        double w = t - double(m);
        return (1 - w) * s.V[m] + w * s.V[m + 1];
    }
    }
    return 0.0;
}

std::string PotentialSpec::describe() const { return id.empty() ? "potential" : id; }

cplx sampled_transform(const SampledPotential& s, cplx k, bool moment) {
    if (s.first_nonzero > s.last_nonzero) return 0.0;
    const std::size_t m0 = s.first_nonzero;
    cplx phase = std::exp(cplx(0, -1) * k * s.x(m0));
    const cplx step = std::exp(cplx(0, -1) * k * s.h);
    cplx acc = 0.0;
    for (std::size_t m = m0; m <= s.last_nonzero; ++m) {
        double g = moment ? s.x(m) * s.V[m] : s.V[m];
        acc += g * phase;
        phase *= step;
    }
    return kInvSqrt2Pi * s.h * acc;
}

cplx quadrature_transform(const PotentialSpec& spec, cplx k, bool moment) {
    using boost::math::quadrature::gauss_kronrod;
    require(spec.dim == 1, ErrorKind::InvalidArgument, "quadrature transform is one-dimensional");
    double lo, hi;
    if (spec.family == PotentialFamily::Gaussian) {
        double c = k.imag() / (2.0 * spec.b);
        double w = std::sqrt(45.0 / spec.b);
        lo = c - w;
        hi = c + w;
    } else if (spec.family == PotentialFamily::Bump) {
        lo = -spec.radius;
        hi = spec.radius;
    } else if (spec.family == PotentialFamily::Sampled) {
        return sampled_transform(*spec.sampled, k, moment);
    } else {
        return 0.0;
    }
    auto f = [&](double x) {
        double v = spec.value(x) * (moment ? x : 1.0);
        return v * std::exp(cplx(0, -1) * k * x);
    };
    double err = 0.0, l1 = 0.0;
    cplx r = gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-14, &err, &l1);
    if (!is_finite(r) || err > 1e-10 * l1 + 1e-300)
        fail(ErrorKind::QuadratureFailure, "Fourier quadrature error " + fmt17(err) + " at k = " + fmt17(k.real()));
    return kInvSqrt2Pi * r;
}

namespace {

void check_fourier_strip(const PotentialSpec& spec, const CPoint& k) {
    const double ap = spec.strip();
    for (Eigen::Index i = 0; i < k.size(); ++i)
        if (!(std::abs(k[i].imag()) < ap))
            fail(ErrorKind::StripViolation, "|Im k| = " + fmt17(std::abs(k[i].imag())) + " outside Vhat strip " + fmt17(ap));
}

}  // namespace

cplx fourier_transform(const PotentialSpec& spec, const CPoint& k) {
    require(k.size() == spec.dim, ErrorKind::InvalidArgument, "Fourier argument dimension mismatch");
    check_fourier_strip(spec, k);
    switch (spec.family) {
    case PotentialFamily::Zero: return 0.0;
    case PotentialFamily::Gaussian: {
        if (spec.method == FourierMethod::Quadrature && spec.dim == 1) return quadrature_transform(spec, k[0]);
        const cplx q = analytic_square(k);
        const cplx g = std::pow(2.0 * spec.b, -0.5 * spec.dim) * std::exp(-q / (4.0 * spec.b));
        cplx r = spec.amplitude * g;
        if (spec.odd_amplitude != 0.0) r += spec.odd_amplitude * cplx(0, -1) * k[0] / (2.0 * spec.b) * g;
        return r;
    }
    case PotentialFamily::Bump: return quadrature_transform(spec, k[0]);
    case PotentialFamily::Sampled: return sampled_transform(*spec.sampled, k[0], false);
    }
    return 0.0;
}

cplx fourier_transform(const PotentialSpec& spec, cplx k) {
    CPoint p(1);
    p[0] = k;
    return fourier_transform(spec, p);
}

cplx moment_transform(const PotentialSpec& spec, cplx k) {
    require(spec.dim == 1, ErrorKind::InvalidArgument, "moment transform is one-dimensional");
    CPoint p(1);
    p[0] = k;
    check_fourier_strip(spec, p);
    switch (spec.family) {
    case PotentialFamily::Zero: return 0.0;
    case PotentialFamily::Gaussian: {
        if (spec.method == FourierMethod::Quadrature) return quadrature_transform(spec, k, true);
        const double b = spec.b;
        const cplx g = std::pow(2.0 * b, -0.5) * std::exp(-k * k / (4.0 * b));
        // i d/dk of the transform
        cplx r = spec.amplitude * cplx(0, -1) * k / (2.0 * b) * g;
        r += spec.odd_amplitude / (2.0 * b) * (1.0 - k * k / (2.0 * b)) * g;
        return r;
    }
    case PotentialFamily::Bump: return quadrature_transform(spec, k, true);
    case PotentialFamily::Sampled: return sampled_transform(*spec.sampled, k, true);
    }
    return 0.0;
}

double FourierKernel::bound(const CPoint& k) const {
    return c_v / (1.0 + std::pow(k.norm(), d_prime));
}

std::vector<CPoint> strip_sample(int dim, double a_prime, double re_extent, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-re_extent, re_extent), im(-a_prime, a_prime);
    std::vector<CPoint> out(count, CPoint(dim));
    for (auto& p : out)
        for (int i = 0; i < dim; ++i) {
            double y = im(rng);
            p[i] = cplx(re(rng), std::abs(y) < a_prime ? y : 0.0);
        }
    return out;
}

FourierKernel certify_decay(const PotentialSpec& spec, double a_prime, const std::vector<CPoint>& sample, int d_prime,
                            double inflation) {
    spec.validate();
    require(a_prime > 0.0 && a_prime <= spec.strip(), ErrorKind::StripViolation, "certification strip exceeds a'");
    FourierKernel fk;
    fk.spec = spec;
    fk.a_prime = a_prime;
    fk.d_prime = d_prime > 0 ? d_prime : spec.smoothness_order();
    fk.inflation = inflation;
    double sup = 0.0;
    for (const auto& k : sample) {
        double v = std::abs(fourier_transform(spec, k)) * (1.0 + std::pow(k.norm(), fk.d_prime));
        if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "non-finite Vhat on certification sample");
        sup = std::max(sup, v);
    }
    fk.raw_c_v = sup;
    fk.c_v = inflation * sup;
    return fk;
}

double smoothness_sup(const PotentialSpec& spec, double extent, double h) {
    require(spec.dim == 1, ErrorKind::InvalidArgument, "smoothness check is one-dimensional");
    const int dp = spec.smoothness_order();
    const double hd = 1e-2;
    double sup = 0.0;
    for (double x = -extent; x <= extent + 1e-12; x += h) {
        for (int a = 0; a <= dp; ++a) {
            double acc = 0.0;
            for (int j = 0; j <= a; ++j)
                acc += ((j % 2) ? -1.0 : 1.0) * binomial(a, j) * spec.value(x + (0.5 * a - j) * hd);
            double deriv = acc / std::pow(hd, a);
            double v = std::exp(spec.decay_rate * std::abs(x)) * std::abs(deriv);
            if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "non-finite smoothness sample");
            sup = std::max(sup, v);
        }
    }
    return sup;
}

EmbeddedConstruction construct_embedded(double xi0, const BumpParams& f, const PositionGrid& grid, double decay_rate) {
    require(xi0 > 0.0, ErrorKind::InvalidArgument, "xi0 must be positive");
    require(f.radius > 0.0 && f.amplitude >= 0.0, ErrorKind::InvalidArgument, "bump must be nonnegative with radius > 0");
    require(grid.spacing > 0.0, ErrorKind::InvalidArgument, "position spacing must be positive");
    if (grid.half_width < f.radius + 8.0 * grid.spacing)
        fail(ErrorKind::GridTooCoarse, "position grid does not cover the bump support");
    if (grid.spacing > f.radius / 100.0) fail(ErrorKind::GridTooCoarse, "fewer than 200 samples across the support");

    auto s = std::make_shared<SampledPotential>();
    const std::size_t M = std::size_t(std::llround(2.0 * grid.half_width / grid.spacing));
    const double h = 2.0 * grid.half_width / double(M);
    s->x0 = -grid.half_width;
    s->h = h;
    s->xi0 = xi0;
    s->rho = f.radius;
    s->bump_amplitude = f.amplitude;
    const std::size_t n = M + 1;

    // Numerov for u'' = xi0 u - f, tridiagonal with exact discrete decay at both ends.
    const double a = h * h * xi0 / 12.0;
    const double off = 1.0 - a, diag = -2.0 * (1.0 + 5.0 * a);
    // discrete decaying ratio r: off (r + 1/r) + diag = 0, r < 1
    const double p = -diag / off;
    const double r = 0.5 * (p - std::sqrt(p * p - 4.0));
    std::vector<double> fx(n), rhs(n), lo(n, off), di(n, diag), up(n, off);
    for (std::size_t m = 0; m < n; ++m) fx[m] = f.value(s->x(m));
    for (std::size_t m = 0; m < n; ++m) {
        double fm1 = m > 0 ? fx[m - 1] : 0.0, fp1 = m + 1 < n ? fx[m + 1] : 0.0;
        rhs[m] = -h * h / 12.0 * (fm1 + 10.0 * fx[m] + fp1);
    }
    di[0] += off * r;
    di[n - 1] += off * r;
    // Thomas algorithm
    std::vector<double> cp(n), dp(n);
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (std::size_t m = 1; m < n; ++m) {
        double den = di[m] - lo[m] * cp[m - 1];
        cp[m] = up[m] / den;
        dp[m] = (rhs[m] - lo[m] * dp[m - 1]) / den;
    }
    s->u.assign(n, 0.0);
    s->u[n - 1] = dp[n - 1];
    for (std::size_t m = n - 1; m-- > 0;) s->u[m] = dp[m] - cp[m] * s->u[m + 1];

    s->V.assign(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        if (fx[m] == 0.0) continue;
        if (!(s->u[m] > 0.0) || !std::isfinite(s->u[m]))
            fail(ErrorKind::SingularU, "u not positive at x = " + fmt17(s->x(m)));
        s->V[m] = (f.second_derivative(s->x(m)) + xi0 * fx[m]) / s->u[m];
    }
    s->index_support();

    EmbeddedConstruction out;
    out.spec.family = PotentialFamily::Sampled;
    out.spec.method = FourierMethod::Quadrature;
    out.spec.decay_rate = decay_rate;
    out.spec.sampled = s;
    out.spec.id = "embedded(xi0=" + fmt17(xi0) + ",rho=" + fmt17(f.radius) + ",A=" + fmt17(f.amplitude) + ")";
    out.target = xi0 * xi0;
    // step of the fourth-difference stencil, chosen so that roundoff stays below truncation
    // the stencil trades truncation against roundoff; keep the best stride
    out.residual = INFINITY;
    for (int stride : {1, 2, 4, 8}) {
        const double r = embedded_residual(*s, stride);
        if (r < out.residual) {
            out.residual = r;
            out.residual_stride = stride;
        }
    }
    return out;
}

double embedded_residual(const SampledPotential& s, int stride) {
    static const double c[9] = {7.0 / 240, -2.0 / 5, 169.0 / 60, -122.0 / 15, 91.0 / 8,
                                -122.0 / 15, 169.0 / 60, -2.0 / 5, 7.0 / 240};
    const double H = stride * s.h;
    const double H4 = H * H * H * H;
    const double e = s.xi0 * s.xi0;
    double num = 0.0, den = 0.0;
    const std::size_t reach = 4 * std::size_t(stride);
    for (std::size_t m = reach; m + reach < s.u.size(); ++m) {
        double d4 = 0.0;
        for (int j = 0; j < 9; ++j) d4 += c[j] * s.u[m + (j - 4) * stride];
        double res = d4 / H4 + s.V[m] * s.u[m] - e * s.u[m];
        num += res * res;
        den += s.u[m] * s.u[m];
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

void save_sampled(const SampledPotential& s, const std::string& csv_path, const std::string& manifest_path) {
    std::ofstream os(csv_path);
    require(bool(os), ErrorKind::IoError, "cannot open " + csv_path);
    os << "x,V,u\n";
    for (std::size_t m = 0; m < s.V.size(); ++m) os << fmt17(s.x(m)) << ',' << fmt17(s.V[m]) << ',' << fmt17(s.u[m]) << '\n';
    nlohmann::json j;
    j["xi0"] = s.xi0;
    j["rho"] = s.rho;
    j["bump_amplitude"] = s.bump_amplitude;
    j["x0"] = s.x0;
    j["h"] = s.h;
    j["count"] = s.V.size();
    j["data"] = csv_path.substr(csv_path.find_last_of('/') + 1);
    std::ofstream ms(manifest_path);
    require(bool(ms), ErrorKind::IoError, "cannot open " + manifest_path);
    ms << j.dump(2) << '\n';
}

std::shared_ptr<SampledPotential> load_sampled(const std::string& csv_path, const std::string& manifest_path) {
    std::ifstream ms(manifest_path);
    require(bool(ms), ErrorKind::IoError, "cannot open " + manifest_path);
    nlohmann::json j = nlohmann::json::parse(ms);
    auto s = std::make_shared<SampledPotential>();
    s->xi0 = j.at("xi0");
    s->rho = j.at("rho");
    s->bump_amplitude = j.at("bump_amplitude");
    s->x0 = j.at("x0");
    s->h = j.at("h");
    std::size_t count = j.at("count");
    std::ifstream is(csv_path);
    require(bool(is), ErrorKind::IoError, "cannot open " + csv_path);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, v, u;
        std::getline(ls, a, ',');
        std::getline(ls, v, ',');
        std::getline(ls, u, ',');
        s->V.push_back(std::strtod(v.c_str(), nullptr));
        s->u.push_back(std::strtod(u.c_str(), nullptr));
    }
    require(s->V.size() == count, ErrorKind::IoError, "sample count mismatch in " + csv_path);
    s->index_support();
    return s;
}

}  // namespace lsd
