#include "lsd/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace lsd;
using nlohmann::json;

namespace {

// Non-normal test matrix with eigenvalues 0, 1, ..., n-1 on the diagonal of a triangular factor,
// conjugated by a fixed well-conditioned similarity.
MatrixXcd nonnormal(int n, std::uint64_t seed, double coupling = 0.3) {
    MatrixXcd T = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) T(i, i) = double(i);
    MatrixXcd R = random_block(n, n, seed) * coupling;
    T += R.triangularView<Eigen::StrictlyUpper>();
    MatrixXcd S = MatrixXcd::Identity(n, n) + 0.1 * random_block(n, n, seed + 1) / std::sqrt(double(n));
    return S * T * S.inverse();
}

FiberOperator wrap(const MatrixXcd& m) {
    FiberOperator op;
    op.matrix = m;
    return op;
}

json reference_json(int N) {
    return {{"schema_version", 1},
            {"dispersion",
             {{"first", {{"family", "even_polynomial"}, {"coefficients", {0, 1}}, {"strip_radius", 0.7}}},
              {"second", {{"family", "even_polynomial"}, {"coefficients", {0, 1}}, {"strip_radius", 0.7}}}}},
            {"potential", {{"family", "gaussian"}, {"amplitude", -0.5}, {"b", 0.5}, {"decay_rate", 4.0}, {"a_prime", 2.0}}},
            {"grid", {{"K", 12}, {"N", N}, {"d", 1}}}};
}

}  // namespace

TEST_CASE("Riesz projection matches the eigenvector projector") {
    const MatrixXcd M = nonnormal(30, 5);
    const auto op = wrap(M);
    for (double lam : {0.0, 7.0, 29.0}) {
        const auto rp = riesz_projection(op, lam, 0.4, 64);
        const MatrixXcd ref = oracle::simple_projector(M, lam);
        CHECK(rp.rank == 1);
        CHECK(rp.idempotency_defect < 1e-10);
        CHECK((rp.P - ref).norm() < 1e-9 * ref.norm());
    }
    // a contour enclosing three eigenvalues
    const auto rp3 = riesz_projection(op, 11.0, 1.5, 128);
    CHECK(rp3.rank == 3);
    CHECK(riesz_rank_probe(M, 11.0, 1.5, 128) == 3);
    CHECK(riesz_rank_probe(M, 0.5, 0.2, 64) == 0);
}

TEST_CASE("Riesz rank counts algebraic multiplicity") {
    // Jordan block of size 2 at 3 plus simple values
    MatrixXcd M = MatrixXcd::Zero(6, 6);
    M(0, 0) = 3.0;
    M(1, 1) = 3.0;
    M(0, 1) = 1.0;
    for (int i = 2; i < 6; ++i) M(i, i) = double(i + 3);
    const auto rp = riesz_projection(wrap(M), 3.0, 0.5, 64);
    CHECK(rp.rank == 2);
    CHECK(rp.idempotency_defect < 1e-12);
}

TEST_CASE("parallel and serial Riesz projections agree bitwise") {
    const MatrixXcd M = nonnormal(40, 9);
    const auto a = riesz_projection(wrap(M), 4.0, 0.4, 64);
    const auto b = riesz_projection_serial(wrap(M), 4.0, 0.4, 64);
    CHECK((a.P - b.P).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contour too close to an eigenvalue is rejected") {
    const MatrixXcd M = nonnormal(10, 2);
    try {
        riesz_projection(wrap(M), 3.0, 1.02, 64);
        FAIL("expected ContourTooClose");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ContourTooClose);
    }
    CHECK_THROWS_AS(riesz_projection(wrap(M), 3.0, -1.0, 64), Error);
}

TEST_CASE("Feshbach determinant equals the Schur-complement ratio") {
    const MatrixXcd M = nonnormal(20, 13);
    const auto rp = riesz_projection(wrap(M), 5.0, 0.4, 64);
    const MatrixXcd basis = orthonormal_range(rp.P, 1e-8);
    REQUIRE(basis.cols() == 1);
    const FeshbachReduction fr(M, basis);
    CHECK(fr.rank() == 1);
    // det(M - z) = det(B22 - z) det F(z); B22 from an independent completion of the basis
    Eigen::HouseholderQR<MatrixXcd> qr(basis);
    const MatrixXcd U = qr.householderQ();
    const MatrixXcd B = U.adjoint() * M * U;
    for (cplx z : {cplx(5.3, 0.2), cplx(-1.0, 1.0), cplx(2.5, -0.4)}) {
        const MatrixXcd full = M - z * MatrixXcd::Identity(20, 20);
        const MatrixXcd b22 = B.bottomRightCorner(19, 19) - z * MatrixXcd::Identity(19, 19);
        const cplx ratio = full.determinant() / b22.determinant();
        CHECK(std::abs(fr.det(z) - ratio) < 1e-9 * std::abs(ratio));
    }
    CHECK(std::abs(fr.det(5.0)) < 1e-10);
    CHECK(fr.winding_number(5.0, 0.3) == 1);
    CHECK(fr.winding_number(5.5, 0.2) == 0);
}

TEST_CASE("spectral P0 reduces det F to lambda - z") {
    const MatrixXcd M = nonnormal(16, 21);
    const auto rp = riesz_projection(wrap(M), 8.0, 0.4, 64);
    const FeshbachReduction fr(M, orthonormal_range(rp.P, 1e-8));
    for (cplx z : {cplx(8.2, 0.1), cplx(3.5, -1.0)}) CHECK(std::abs(fr.det(z) - (8.0 - z)) < 1e-9);
}

TEST_CASE("Feshbach zeros reproduce the spectrum for a generic P0") {
    const int n = 16;
    const MatrixXcd M = nonnormal(n, 21);
    const MatrixXcd basis = orthonormal_range(random_block(n, 2, 77), 1e-12);
    const FeshbachReduction fr(M, basis);
    Eigen::HouseholderQR<MatrixXcd> qr(basis);
    const MatrixXcd U = qr.householderQ();
    const auto reduced = eig_general((U.adjoint() * M * U).bottomRightCorner(n - 2, n - 2), false).values;
    const auto ev = eig_general(M, false).values;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double gap = INFINITY;
        for (Eigen::Index j = 0; j < reduced.size(); ++j) gap = std::min(gap, std::abs(ev[i] - reduced[j]));
        REQUIRE(gap > 1e-3);
        const double scale = std::abs(fr.det(ev[i] + cplx(0.0, 0.5)));
        CHECK(std::abs(fr.det(ev[i])) < 1e-9 * scale);
    }
}

TEST_CASE("Feshbach rejects a non-orthonormal basis") {
    const MatrixXcd M = nonnormal(8, 3);
    CHECK_THROWS_AS(FeshbachReduction(M, 2.0 * MatrixXcd::Identity(8, 1)), Error);
}

TEST_CASE("approximate point spectrum probe equals the smallest singular value") {
    const MatrixXcd M = nonnormal(25, 17, 1.0);
    for (cplx lam : {cplx(3.5, 0.0), cplx(10.2, 0.7)}) {
        const MatrixXcd a = M - lam * MatrixXcd::Identity(25, 25);
        const double smin = Eigen::JacobiSVD<MatrixXcd>(a).singularValues().minCoeff();
        CHECK(aps_probe(M, lam, 2, 2000) == doctest::Approx(smin).epsilon(1e-8));
    }
}

TEST_CASE("sector bound holds with C and fails with C / 100") {
    Pipeline p(parse_scenario(reference_json(201)));
    const double C = p.constants(true).C;
    CHECK(C > 1.0);
    const cplx theta(0.0, 0.05);
    const auto op = p.assemble(0.0, theta);
    const auto r = eigendecompose(op);
    CHECK(sector_check(r, C, theta).violations == 0);
    CHECK(sector_check(r, C / 100.0, theta).violations > 0);
}

TEST_CASE("free spectrum lies on the rotated curve") {
    auto j = reference_json(201);
    j["potential"] = {{"family", "zero"}};
    Pipeline p(parse_scenario(j));
    const cplx theta(0.0, 0.05);
    const auto op = p.assemble(0.0, theta);
    auto r = eigendecompose(op);
    classify(r, op);
    CHECK(r.count(SpectralClass::ContinuumArc) == r.size());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r.curve_distance[i] < 1e-10);
}

TEST_CASE("rectangle geometry") {
    CHECK_THROWS_AS(Rectangle(1.0, 0.0, 1.0), Error);
    CHECK_THROWS_AS(Rectangle(1.0, 0.5, -1.0), Error);
    CHECK_THROWS_AS(Rectangle(std::nan(""), 0.5, 1.0), Error);
    const Rectangle rect(1.0, 0.25, 2.0);
    const cplx theta(0.0, 0.1);
    CHECK(rect.contains(cplx(1.1, -0.1), theta));
    CHECK_FALSE(rect.contains(cplx(1.1, -0.3), theta));
    CHECK_FALSE(rect.contains(cplx(1.3, 0.0), theta));

    SpectrumReport r;
    r.theta = theta;
    r.eigenvalues.resize(4);
    r.eigenvalues << cplx(1.0, 0.0), cplx(1.1, -0.05), cplx(0.5, 0.0), cplx(1.0 + 1e-9, 0.0);
    const auto st = rectangle_scan(r, rect, {cplx(1.0, 0.0)}, 1e-6);
    CHECK(st.inside.size() == 3);
    CHECK(st.matched.size() == 2);
    REQUIRE(st.stray_count() == 1);
    CHECK(st.strays.front() == 1);
}

TEST_CASE("distance to a polyline") {
    VectorXcd curve(3);
    curve << cplx(0, 0), cplx(1, 0), cplx(1, 1);
    double seg = 0.0;
    cplx nearest;
    CHECK(distance_to_polyline(cplx(0.5, 0.3), curve, &seg, &nearest) == doctest::Approx(0.3));
    CHECK(seg == doctest::Approx(1.0));
    CHECK(std::abs(nearest - cplx(0.5, 0.0)) < 1e-15);
    CHECK(distance_to_polyline(cplx(2.0, 2.0), curve) == doctest::Approx(std::sqrt(2.0)));
    CHECK(distance_to_polyline(cplx(1.0, 0.5), curve) == doctest::Approx(0.0));
}

TEST_CASE("diagonal operators diagonalize exactly") {
    FiberOperator op;
    op.matrix = MatrixXcd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) op.matrix(i, i) = cplx(0.1 * i * i, -0.01 * i);
    const auto r = eigendecompose(op, 1e-8, true);
    for (int i = 0; i < 5; ++i) {
        bool found = false;
        for (int j = 0; j < 5; ++j) found = found || r.eigenvalues[j] == op.matrix(i, i);
        CHECK(found);
    }
    for (double res : r.residuals) CHECK(res == 0.0);
}
