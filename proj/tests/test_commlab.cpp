#include "lsd/commlab.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lsd;

namespace {

const cplx I(0.0, 1.0);

Eigen::Matrix2cd sigma(char which) {
    Eigen::Matrix2cd s;
    if (which == 'x') s << 0, 1, 1, 0;
    if (which == 'y') s << 0, -I, I, 0;
    if (which == 'z') s << 1, 0, 0, -1;
    return s;
}

double rel(const MatrixXcd& a, const MatrixXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("Pauli ladder in closed form") {
    const auto p = pauli_pair();
    const auto lad = ladder(p, 6);
    CHECK((lad.ad[1] - (-2.0 * I) * sigma('y')).norm() < 1e-15);
    CHECK((lad.ad[2] - 4.0 * sigma('x')).norm() < 1e-15);
    // ad_{2j} = 4^j sigma_x, so the weighted norms are 2^k / sqrt 2 and C = sqrt 2
    CHECK(lad.growth_constant == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
    CHECK(lad.radius() == doctest::Approx(1.0 / (3.0 * lad.growth_constant)));
    // e^{i t sigma_z} sigma_x e^{-i t sigma_z} = cos 2t sigma_x - sin 2t sigma_y
    const double t = 0.1;
    const MatrixXcd want = std::cos(2 * t) * sigma('x') - std::sin(2 * t) * sigma('y');
    CHECK(rel(exact_conjugation(p, t), want) < 1e-15);
    CHECK(rel(conjugate_series(lad, t, 6).matrix, want) < 1e-6);
}

TEST_CASE("identity generator and commuting pairs leave H unchanged") {
    auto p = random_pair(12, 3);
    p.A = MatrixXcd::Identity(12, 12);
    const auto lad = ladder(p, 10);
    for (std::size_t k = 1; k < lad.ad.size(); ++k) CHECK(lad.ad[k].norm() == 0.0);
    CHECK(rel(conjugate_series(lad, cplx(0.0, 0.7)).matrix, p.H) < 1e-15);

    auto q = random_pair(12, 4);
    q.A = q.H * q.H - 2.0 * q.H;  // commutes with H
    const auto lq = ladder(q, 5);
    CHECK(lq.ad[1].norm() < 1e-12 * q.H.norm() * q.A.norm());
    CHECK(rel(exact_conjugation(q, cplx(0.0, 0.05)), q.H) < 1e-10);
}

TEST_CASE("series at theta = 0 is H") {
    const auto p = random_pair(20, 11);
    const auto lad = ladder(p, 30);
    CHECK((conjugate_series(lad, 0.0).matrix - p.H).norm() == 0.0);
}

TEST_CASE("eigendecomposition conjugation agrees with the Pade exponential") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto p = random_pair(40, seed);
        const auto lad = ladder(p, 60);
        for (cplx th : {cplx(0.0, 0.9 * lad.radius()), cplx(0.3, -0.2) * lad.radius(), cplx(0.5, 0.0)}) {
            const MatrixXcd ref = oracle::pade_conjugation(p.H, p.A, th);
            CHECK(rel(exact_conjugation(p, th), ref) < 1e-12);
        }
    }
}

TEST_CASE("truncated series matches exponential conjugation inside the radius") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = random_pair(40, seed);
        const auto lad = ladder(p, 60);
        const cplx th(0.0, 0.9 * lad.radius());
        const auto s = conjugate_series(lad, th);
        CHECK(rel(s.matrix, oracle::pade_conjugation(p.H, p.A, th)) < 1e-10);
        CHECK(s.truncation_bound < 1e-10);
    }
}

TEST_CASE("series refuses |theta| >= R'") {
    const auto p = random_pair(10, 5);
    const auto lad = ladder(p, 20);
    try {
        conjugate_series(lad, cplx(0.0, lad.radius()));
        FAIL("expected RadiusExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RadiusExceeded);
    }
}

TEST_CASE("relative bound on W_theta holds across seeds") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto p = random_pair(20, seed);
        const auto lad = ladder(p, 40);
        const auto w = w_theta_bound(p, lad, cplx(0.0, 0.9 * lad.radius()));
        CHECK(w.holds());
        CHECK(w.ratio() > 0.0);
        CHECK(w.ratio() <= 1.0 + 1e-12);
    }
}

TEST_CASE("finite sector bound holds and the conjugated spectrum stays real") {
    const auto p = random_pair(30, 8);
    const auto lad = ladder(p, 40);
    const cplx th(0.0, 0.9 * lad.radius());
    const auto r = sector_bound_finite(p, th, lad.growth_constant);
    CHECK(r.violations == 0);
    CHECK(r.worst_margin > 0.0);
    // a similarity transform: eigenvalues are those of H
    const auto ev = eig_general(exact_conjugation(p, th), false).values;
    const auto h = eig_hermitian(p.H, false).values;
    std::vector<double> re;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        CHECK(std::abs(ev[i].imag()) < 1e-10 * h.cwiseAbs().maxCoeff());
        re.push_back(ev[i].real());
    }
    std::sort(re.begin(), re.end());
    for (int i = 0; i < 30; ++i) CHECK(re[i] == doctest::Approx(h[i]).epsilon(1e-10));
}

TEST_CASE("gaussian regularization of a diagonal generator") {
    auto p = random_pair(8, 2);
    VectorXd a(8);
    a << -3, -2, -1, -0.5, 0.5, 1, 2, 3;
    p.A = a.cast<cplx>().asDiagonal();
    const VectorXcd psi = random_unit_vector(8, 6);
    const cplx th(0.0, 0.2);
    const VectorXcd got = gaussian_regularize(p, psi, 7, th);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(got[i] - std::exp(-a[i] * a[i] / 14.0 + I * th * a[i]) * psi[i]) < 1e-15);

    const auto rc = regularization_convergence(p, psi, 0.2, {10, 20, 40, 80, 160, 320});
    CHECK(rc.loglog_slope == doctest::Approx(-1.0).epsilon(0.1));
    for (std::size_t i = 1; i < rc.error.size(); ++i) CHECK(rc.error[i] < rc.error[i - 1]);
}

TEST_CASE("series adjoint identity at generic theta") {
    const auto p = random_pair(30, 13);
    const auto lad = ladder(p, 60);
    for (cplx th : {cplx(0.1, 0.2), cplx(-0.3, 0.5), cplx(0.0, -0.8)}) CHECK(series_adjoint_defect(lad, th * lad.radius()) < 1e-12);
}

TEST_CASE("graph norms are equivalent within the relative bound") {
    const auto p = random_pair(25, 21);
    const auto lad = ladder(p, 40);
    const cplx th(0.0, 0.9 * lad.radius());
    const double q = lad.growth_constant * std::abs(th);
    const double b = q / (1.0 - q);
    const auto g = graph_norm_check(p, th, 100, 5);
    CHECK(g.min_ratio >= 1.0 - b);
    CHECK(g.max_ratio <= 1.0 + b);
    CHECK(g.max_ratio > g.min_ratio);
}

TEST_CASE("contour Cauchy coefficients reproduce the ladder") {
    const auto p = random_pair(20, 17);
    const auto lad = ladder(p, 10);
    const VectorXcd psi = random_unit_vector(20, 2);
    // rounding in the 1/r^k weights limits the usable order
    CHECK(contour_derivative_defect(p, lad, psi, 0.9 * lad.radius(), 4) <= 1e-8);
}

TEST_CASE("pair validation") {
    auto p = random_pair(6, 1);
    CHECK_NOTHROW(p.validate());
    p.H(0, 1) += 0.1;
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK_THROWS_AS(random_pair(201, 1).validate(), Error);
}

TEST_CASE("batch over seeds is deterministic") {
    BatchOptions o;
    o.n = 12;
    o.k_max = 40;
    const auto a = commlab_batch({1, 2, 3}, o);
    const auto b = commlab_batch({1, 2, 3}, o);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a[i].C == b[i].C);
        CHECK(a[i].series_deviation == b[i].series_deviation);
        CHECK(a[i].series_deviation < 1e-10);
    }
    CHECK(batch_json(a).dump() == batch_json(b).dump());
}
