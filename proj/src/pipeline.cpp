#include "lsd/pipeline.hpp"

#include <cmath>

namespace lsd {

DispersionSpec make_dispersion(const DispersionConfig& c) {
    DispersionSpec d;
    if (c.family == "even_polynomial")
        d = DispersionSpec::even_polynomial(c.coefficients, 1, c.strip_radius);
    else if (c.family == "relativistic")
        d = DispersionSpec::relativistic(c.exponent, 1, c.strip_radius);
    else if (c.family == "quartic")
        d = DispersionSpec::quartic(c.coefficients.size() > 0 ? c.coefficients[0] : 0.0,
                                    c.coefficients.size() > 1 ? c.coefficients[1] : 0.0, 1, c.strip_radius);
    else if (c.family == "zero")
        d = DispersionSpec::zero(1, c.strip_radius);
    else
        fail(ErrorKind::ConfigError, "unknown dispersion family " + c.family);
    d.growth_exponent = c.growth_exponent;
    d.growth_constant = c.growth_constant;
    return d;
}

PotentialSpec make_potential(const PotentialConfig& c, std::optional<double> xi0, EmbeddedConstruction* info) {
    PotentialSpec v;
    if (c.family == "zero") {
        v = PotentialSpec::zero();
    } else if (c.family == "gaussian") {
        v = PotentialSpec::gaussian(c.amplitude, c.b);
        v.odd_amplitude = c.odd_amplitude;
    } else if (c.family == "bump") {
        v = PotentialSpec::bump(c.amplitude, c.radius);
    } else if (c.family == "embedded") {
        auto e = construct_embedded(xi0.value_or(c.xi0), BumpParams{c.bump_amplitude, c.bump_radius},
                                    PositionGrid{c.half_width, c.spacing}, c.decay_rate);
        if (info) *info = e;
        v = e.spec;
    } else if (c.family == "sampled") {
        v.family = PotentialFamily::Sampled;
        v.method = FourierMethod::Quadrature;
        v.sampled = load_sampled(c.csv, c.manifest);
        v.id = "sampled(" + c.csv + ")";
    } else {
        fail(ErrorKind::ConfigError, "unknown potential family " + c.family);
    }
    if (c.family != "zero") v.decay_rate = c.decay_rate;
    v.a_prime = c.a_prime;
    if (c.family == "gaussian" || c.family == "bump")
        v.method = c.method == "quadrature" ? FourierMethod::Quadrature : FourierMethod::ClosedForm;
    v.validate();
    return v;
}

nlohmann::json Constants::to_json() const {
    return {{"C_omega", c_omega}, {"C_omega_prime", c_omega_prime}, {"C_V", c_v}, {"a_prime", a_prime},
            {"strip", strip},     {"R", R},                         {"M", M},     {"C", C},
            {"R_prime", r_prime}, {"M_samples", m_samples}};
}

Pipeline::Pipeline(Scenario s) : s_(std::move(s)) {
    pair_.first = make_dispersion(s_.first);
    pair_.second = make_dispersion(s_.second);
    pair_.validate();
}

AssemblyOptions Pipeline::assembly_options() const {
    AssemblyOptions o;
    o.tail_tolerance = s_.tol.tail_tolerance;
    return o;
}

const PotentialSpec& Pipeline::potential() {
    if (!potential_) {
        if (s_.potential.family == "embedded") {
            EmbeddedConstruction e;
            potential_ = make_potential(s_.potential, std::nullopt, &e);
            embedded_ = e;
        } else {
            potential_ = make_potential(s_.potential);
        }
    }
    return *potential_;
}

const std::optional<EmbeddedConstruction>& Pipeline::embedded() {
    potential();
    return embedded_;
}

std::vector<double> Pipeline::xi_values() const {
    if (s_.sweep.present && s_.sweep.parameter == "xi") return s_.sweep.values();
    return s_.xi;
}

const FieldBounds& Pipeline::bounds() {
    if (!bounds_) {
        const auto xs = xi_values();
        BoundsRequest req;
        req.xi_lo = RPoint::Constant(1, *std::min_element(xs.begin(), xs.end()));
        req.xi_hi = RPoint::Constant(1, *std::max_element(xs.begin(), xs.end()));
        req.strip = pair_.strip_radius();
        req.resolution = s_.certify.resolution;
        req.k_extent = s_.certify.k_extent;
        bounds_ = certify_bounds(pair_, req);
    }
    return *bounds_;
}

double Pipeline::admissible_radius() { return admissible_R(bounds(), pair_.strip_radius(), potential().strip(), s_.d); }

FlowProblem Pipeline::flow_problem(double xi) {
    FlowProblem p;
    p.pair = pair_;
    p.xi = CPoint::Constant(1, xi);
    p.bounds = bounds();
    p.tol = s_.tol.flow_tol;
    return p;
}

FiberOperator Pipeline::assemble(double xi, cplx theta) { return assemble(xi, theta, potential()); }

FiberOperator Pipeline::assemble(double xi, cplx theta, const PotentialSpec& V) {
    const CPoint x = CPoint::Constant(1, xi);
    if (theta == 0.0) return assemble_H(grid(), pair_, V, x, assembly_options());
    const double R = admissible_R(bounds(), pair_.strip_radius(), V.strip(), s_.d);
    if (!(std::abs(theta) < R))
        fail(ErrorKind::RadiusExceeded, "|theta| = " + fmt17(std::abs(theta)) + " not below admissible R = " + fmt17(R));
    const FlowProblem prob = flow_problem(xi);
    const FlowTable table = build_deformation_table(grid(), prob, theta);
    DeformationParams dp;
    dp.theta = theta;
    dp.admissible_R = R;
    dp.c_omega = bounds().c_omega;
    return assemble_H_theta(grid(), pair_, V, x, table, dp, assembly_options());
}

FourierKernel Pipeline::kernel() {
    if (!kernel_) {
        const auto& V = potential();
        const auto sample = strip_sample(s_.d, V.strip(), s_.K, std::size_t(s_.certify.sample_count), s_.seed);
        kernel_ = certify_decay(V, V.strip(), sample, s_.certify.d_prime);
    }
    return *kernel_;
}

const Constants& Pipeline::constants(bool with_M) {
    if (constants_ && (have_M_ || !with_M)) return *constants_;
    Constants c;
    const auto& b = bounds();
    c.c_omega = b.c_omega;
    c.c_omega_prime = b.c_omega_prime;
    c.strip = pair_.strip_radius();
    c.a_prime = potential().strip();
    c.c_v = kernel().c_v;
    c.R = admissible_radius();
    if (with_M) {
        const double xi = xi_values().front();
        const FiberOperator h0 = assemble(xi, 0.0);
        const int n = std::max(1, s_.certify.theta_samples);
        for (int m = 0; m < n; ++m) {
            const cplx th = std::polar(0.9 * c.R, 2.0 * M_PI * m / n);
            const FiberOperator ht = assemble(xi, th);
            c.m_samples.push_back(resolvent_weighted_norm(ht.matrix, h0.matrix));
        }
        c.M = *std::max_element(c.m_samples.begin(), c.m_samples.end());
        c.C = std::max(1.0, c.M) / c.R;
        c.r_prime = 1.0 / (3.0 * c.C);
        have_M_ = true;
    }
    constants_ = c;
    return *constants_;
}

ThresholdSet Pipeline::thresholds(double xi) {
    return threshold_set(pair_, xi, grid().nodes(), s_.tol.newton_tol);
}

MourreReport Pipeline::mourre(double xi, double lambda, bool compact_norm) {
    MourreOptions o;
    o.shell_step = s_.mourre.shell_step;
    o.compact_norm = compact_norm;
    return extract_constants(grid(), pair_, potential(), lambda, CPoint::Constant(1, xi), thresholds(xi).critical_values,
                             o);
}

BandFactory Pipeline::band_factory() {
    if (!s_.sweep.present) fail(ErrorKind::ConfigError, "key 'sweep' is required for a band sweep");
    const cplx theta = s_.theta.front();
    if (s_.sweep.parameter == "xi")
        return [this, theta](double xi) { return BandInput{assemble(xi, theta), thresholds(xi), std::nullopt}; };
    const double fiber_xi = s_.xi.front();
    const ThresholdSet ts = thresholds(fiber_xi);
    return [this, theta, fiber_xi, ts](double xi0) {
        const PotentialSpec V = make_potential(s_.potential, xi0);
        return BandInput{assemble(fiber_xi, theta, V), ts, std::nullopt};
    };
}

BandOptions Pipeline::band_options() const {
    BandOptions bo;
    bo.matching_tol = s_.tol.match_tol;
    bo.band_lipschitz = s_.tol.band_lipschitz;
    return bo;
}

Rectangle Pipeline::rectangle(double xi) {
    const auto& rc = s_.rectangle;
    const double center = rc.center.value_or(s_.mourre.lambda);
    if (rc.half_width && rc.depth_slope) return Rectangle(center, *rc.half_width, *rc.depth_slope);
    const MourreReport m = mourre(xi, center, false);
    return Rectangle(center, rc.half_width.value_or(m.kappa), rc.depth_slope.value_or(0.5 * m.e));
}

}  // namespace lsd
