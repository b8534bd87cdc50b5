#include "lsd/flow.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace lsd;

namespace {
CPoint pt(cplx z) { return CPoint::Constant(1, z); }
RPoint rp(double k) { return RPoint::Constant(1, k); }

FlowProblem reference_problem(double xi = 0.0, bool with_bounds = true) {
    FlowProblem p;
    p.pair = {DispersionSpec::even_polynomial({0, 1}, 1, 0.7), DispersionSpec::even_polynomial({0, 1}, 1, 0.7)};
    p.xi = pt(xi);
    if (with_bounds) {
        BoundsRequest req;
        req.xi_lo = RPoint::Constant(1, xi);
        req.xi_hi = RPoint::Constant(1, xi);
        req.strip = 0.7;
        p.bounds = certify_bounds(p.pair, req);
    }
    return p;
}
}  // namespace

TEST_CASE("real flow is reversible") {
    const auto p = reference_problem();
    for (double k : {-1.3, -0.2, 0.0, 0.7, 2.5}) {
        const auto f = integrate_real(p, RPoint::Constant(1, k), 0.8);
        const auto b = integrate_real(p, f.gamma, -0.8);
        CHECK(std::abs(b.gamma[0] - k) < 1e-11);
        CHECK(std::abs(f.jac * b.jac - 1.0) < 1e-11);
        CHECK(f.jac > 0.0);
    }
}

TEST_CASE("complex continuation with real time matches the real flow") {
    const auto p = reference_problem();
    const auto r = integrate_real(p, RPoint::Constant(1, 0.6), 0.05);
    const auto c = continue_complex(p, rp(0.6), cplx(0.05, 0.0));
    CHECK(std::abs(c.gamma[0] - r.gamma[0]) < 1e-12);
    CHECK(std::abs(c.jac - r.jac) < 1e-12);
    CHECK(c.jac_arg == 0.0);
}

TEST_CASE("Jacobian agrees with the variational equation on a straight path") {
    const auto p = reference_problem(0.3);
    auto v = [&](cplx y) { return vector_field(p.pair, p.xi, pt(y))[0]; };
    for (cplx theta : {cplx(0.0, 0.09), cplx(0.05, -0.07), cplx(-0.08, 0.02)}) {
        for (double k : {-1.1, 0.15, 0.9}) {
            const auto c = continue_complex(p, rp(k), theta);
            const auto o = oracle::variational_rk4(v, k, theta);
            CHECK(std::abs(c.gamma[0] - o.gamma) < 1e-10);
            CHECK(std::abs(c.jac - o.det) < 1e-8);
        }
    }
}

TEST_CASE("group law and inverse identity on random data") {
    const auto p = reference_problem();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
        const auto g = check_group_and_inverse(p, RPoint::Constant(1, u(rng)), u(rng), u(rng));
        CHECK(g.max() <= 1e-9);
    }
}

TEST_CASE("equilibria stay put") {
    // v vanishes at k = xi / 2 for the reference family
    const auto p = reference_problem(0.5);
    const auto c = continue_complex(p, rp(0.25), cplx(0.03, 0.08));
    CHECK(std::abs(c.gamma[0] - 0.25) < 10 * p.tol);
}

TEST_CASE("flow table respects speed, strip and Jacobian bounds") {
    const auto p = reference_problem();
    const MomentumGrid g{12.0, 201, 1};
    const cplx theta(0.0, -0.09);
    const auto t = build_flow_table(g, p, theta);
    const double c = p.bounds->c_omega;
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(t.gamma[i][0] - t.nodes[i]) <= c * std::abs(theta));
        CHECK(std::abs(t.gamma[i][0].imag()) <= c * std::abs(theta.imag()));
    }
    CHECK(t.margins.jac_modulus <= 1.0);
    CHECK(t.margins.jac_arg <= 1.0);
    CHECK(t.grid_id == g.id());
}

TEST_CASE("continuation beyond the admissible radius is a strip violation") {
    const auto p = reference_problem();
    const double r = p.admissible_radius();
    try {
        continue_complex(p, rp(0.3), cplx(0.0, 1.5 * r));
        FAIL("expected StripViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StripViolation);
    }
}

TEST_CASE("separation lower bound holds on sampled pairs") {
    const auto p = reference_problem();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const cplx theta(0.0, 0.08);
    for (int i = 0; i < 100; ++i) {
        const RPoint a = RPoint::Constant(1, u(rng)), b = RPoint::Constant(1, u(rng));
        const double d = std::abs(continue_complex(p, a, theta).gamma[0] - continue_complex(p, b, theta).gamma[0]);
        CHECK(d >= separation_lower_bound(*p.bounds, a, b, theta) * (1 - 1e-12));
    }
}
