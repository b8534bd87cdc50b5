#include "lsd/dispersion.hpp"

#include <doctest.h>

#include <random>

using namespace lsd;

namespace {
CPoint pt(cplx z) { return CPoint::Constant(1, z); }
DispersionPair reference() {
    return {DispersionSpec::even_polynomial({0, 1}, 1, 0.7), DispersionSpec::even_polynomial({0, 1}, 1, 0.7)};
}
}  // namespace

TEST_CASE("even polynomial evaluates k^2 analytically") {
    const auto d = DispersionSpec::even_polynomial({0, 1});
    const cplx k(0.3, 0.2);
    CHECK(std::abs(eval_omega(d, pt(k)) - k * k) < 1e-15);
    CHECK(std::abs(grad_omega(d, pt(k))[0] - 2.0 * k) < 1e-15);
    CHECK(std::abs(hessian_omega(d, pt(k))(0, 0) - 2.0) < 1e-15);
}

TEST_CASE("relativistic family (1 + k^2)^s on the imaginary axis") {
    const cplx k(0.0, 0.3);
    const auto half = DispersionSpec::relativistic(0.5, 1, 0.2);
    CHECK(std::abs(eval_omega(half, pt(k)) - std::sqrt(0.91)) < 1e-14);
    const auto quarter = DispersionSpec::relativistic(0.25, 1, 0.2);
    CHECK(std::abs(eval_omega(quarter, pt(k)) - std::pow(0.91, 0.25)) < 1e-14);
}

TEST_CASE("relativistic strip must stay inside the branch-point distance") {
    CHECK_THROWS_AS(DispersionSpec::relativistic(0.5, 1, 0.6).validate(), Error);
    CHECK_NOTHROW(DispersionSpec::relativistic(0.5, 1, 0.4).validate());
}

TEST_CASE("quartic family is k^4") {
    const auto q = DispersionSpec::quartic();
    const cplx k(1.0, 0.1);
    CHECK(std::abs(eval_omega(q, pt(k)) - std::pow(k, 4)) < 1e-13);
    CHECK(std::abs(grad_omega(q, pt(k))[0] - 4.0 * std::pow(k, 3)) < 1e-13);
}

TEST_CASE("derivatives agree with central differences") {
    const auto d = DispersionSpec::even_polynomial({1, -2, 0.5});
    const double h = 1e-5;
    for (cplx k : {cplx(0.4, 0.1), cplx(-1.2, -0.2), cplx(2.0, 0.0)}) {
        const cplx fd = (eval_omega(d, pt(k + h)) - eval_omega(d, pt(k - h))) / (2 * h);
        CHECK(std::abs(fd - grad_omega(d, pt(k))[0]) < 1e-8);
        const cplx fd2 = (grad_omega(d, pt(k + h))[0] - grad_omega(d, pt(k - h))[0]) / (2 * h);
        CHECK(std::abs(fd2 - hessian_omega(d, pt(k))(0, 0)) < 1e-8);
    }
}

TEST_CASE("fiber symbol and vector field") {
    const auto p = reference();
    const CPoint xi = pt(0.4);
    const cplx k(0.3, 0.05);
    CHECK(std::abs(omega_xi(p, xi, pt(k)) - ((0.4 - k) * (0.4 - k) + k * k)) < 1e-15);
    CHECK(std::abs(grad_omega_xi(p, xi, pt(k))[0] - (4.0 * k - 0.8)) < 1e-15);
    const cplx v = std::exp(-k * k - 0.16) * (4.0 * k - 0.8);
    CHECK(std::abs(vector_field(p, xi, pt(k))[0] - v) < 1e-15);
    const double h = 1e-5;
    const cplx div = (vector_field(p, xi, pt(k + h))[0] - vector_field(p, xi, pt(k - h))[0]) / (2 * h);
    CHECK(std::abs(divergence_v(p, xi, pt(k)) - div) < 1e-8);
    const auto fs = field_and_divergence(p, xi, pt(k));
    CHECK(std::abs(fs.v[0] - v) < 1e-15);
    CHECK(std::abs(fs.div - divergence_v(p, xi, pt(k))) < 1e-14);
}

TEST_CASE("evaluation outside the analyticity strip is rejected") {
    const auto d = DispersionSpec::even_polynomial({0, 1}, 1, 0.5);
    try {
        eval_omega(d, pt(cplx(0.0, 1.5)));
        FAIL("expected StripViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StripViolation);
    }
}

TEST_CASE("certified field bounds dominate a dense independent sample") {
    const auto p = reference();
    BoundsRequest req;
    req.xi_lo = RPoint::Constant(1, 0.0);
    req.xi_hi = RPoint::Constant(1, 0.0);
    req.strip = 0.7;
    const FieldBounds b = certify_bounds(p, req);
    double sup_v = 0.0, sup_dv = 0.0;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> re(-6, 6), im(-0.7, 0.7);
    for (int i = 0; i < 20000; ++i) {
        const cplx k(re(rng), im(rng));
        sup_v = std::max(sup_v, std::abs(vector_field(p, pt(0.0), pt(k))[0]));
        sup_dv = std::max(sup_dv, std::abs(jacobian_v(p, pt(0.0), pt(k))(0, 0)));
    }
    CHECK(b.c_omega >= sup_v);
    CHECK(b.c_omega_prime >= sup_dv);
    CHECK(b.raw_c_omega <= b.c_omega);
}

TEST_CASE("growth bound for the quadratic family") {
    const auto d = DispersionSpec::even_polynomial({0, 1}, 1, 0.5);
    CHECK(check_growth(d, 20.0, 0.1).ok());
}
