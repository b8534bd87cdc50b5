#include "lsd/pipeline.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace lsd;
using nlohmann::json;

namespace {

json reference_json(int N) {
    return {{"schema_version", 1},
            {"dispersion",
             {{"first", {{"family", "even_polynomial"}, {"coefficients", {0, 1}}, {"strip_radius", 0.7}}},
              {"second", {{"family", "even_polynomial"}, {"coefficients", {0, 1}}, {"strip_radius", 0.7}}}}},
            {"potential", {{"family", "gaussian"}, {"amplitude", -0.5}, {"b", 0.5}, {"decay_rate", 4.0}, {"a_prime", 2.0}}},
            {"grid", {{"K", 12}, {"N", N}, {"d", 1}}}};
}

Pipeline reference(int N = 201) { return Pipeline(parse_scenario(reference_json(N))); }

}  // namespace

TEST_CASE("undeformed operator is Hermitian and matches the direct assembly") {
    auto p = reference(201);
    const auto h0 = p.assemble(0.0, 0.0);
    CHECK(hermitian_defect(h0.matrix) < 1e-15 * h0.norm_estimate + 1e-300);
    const auto direct = assemble_H(p.grid(), p.pair(), p.potential(), CPoint::Constant(1, 0.0), p.assembly_options());
    CHECK((direct.matrix - h0.matrix).cwiseAbs().maxCoeff() == 0.0);
    // diagonal free part is 2 k^2 at xi = 0
    for (int i = 0; i < 201; i += 20) CHECK(std::abs(h0.multiplication[i] - 2.0 * std::pow(p.grid().node(i), 2)) < 1e-12);
}

TEST_CASE("adjoint identity: H(theta)^H = H(conj theta)") {
    auto p = reference(201);
    for (cplx theta : {cplx(0.0, 0.05), cplx(0.02, 0.04), cplx(-0.03, -0.02)}) {
        const auto a = p.assemble(0.0, theta);
        const auto b = p.assemble(0.0, std::conj(theta));
        const double d = (a.matrix.adjoint() - b.matrix).cwiseAbs().maxCoeff();
        CHECK(d <= 1e-13 * a.norm_estimate);
        CHECK(adjoint_defect(a, b) == doctest::Approx(d));
    }
}

TEST_CASE("conjugation symmetry for even potentials, diagnostic otherwise") {
    auto p = reference(201);
    const cplx theta(0.01, 0.05);
    const auto a = p.assemble(0.0, theta);
    const auto b = p.assemble(0.0, std::conj(theta));
    CHECK(conjugation_check(a, b, p.potential().is_even()).ok());

    auto odd = PotentialSpec::gaussian(-0.5, 0.5);
    odd.odd_amplitude = 0.3;
    const auto c = p.assemble(0.0, theta, odd);
    const auto d = p.assemble(0.0, std::conj(theta), odd);
    CHECK_THROWS_AS(conjugation_check(c, d, odd.is_even()), Error);
    const auto diag = conjugation_check(c, d, odd.is_even(), ConjugationMode::Diagnostic);
    CHECK_FALSE(diag.applicable);
    CHECK_FALSE(diag.ok());
}

TEST_CASE("deformation beyond the admissible radius is rejected") {
    auto p = reference(101);
    const double R = p.admissible_radius();
    try {
        p.assemble(0.0, cplx(0.0, 1.5 * R));
        FAIL("expected RadiusExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RadiusExceeded);
    }
}

TEST_CASE("kernel integral constant") {
    CHECK(c_d_integral(1, 2) == doctest::Approx(M_PI).epsilon(1e-12));
    // int 1/(1+|k|^4) dk = pi / sqrt 2
    CHECK(c_d_integral(1, 4) == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("dilated kernel norm respects its bound") {
    auto p = reference(201);
    const auto op = p.assemble(0.0, cplx(0.0, 0.05));
    const auto r = dilated_kernel_norm_check(op, p.bounds(), p.kernel());
    CHECK(r.ok());
    CHECK(r.norm > 0.0);
}

TEST_CASE("bound state agrees with a position-space finite-difference oracle") {
    auto p = reference(401);
    const auto V = [](double x) { return -0.5 * std::exp(-0.5 * x * x); };
    const double ref = oracle::lowest_eigenvalue_fd(2.0, V, 40.0, 0.02);
    for (cplx theta : {cplx(0.0, 0.0), cplx(0.0, 0.05)}) {
        const auto op = p.assemble(0.0, theta);
        const auto ev = eig_general(op.matrix, false).values;
        cplx lowest = ev[0];
        for (Eigen::Index i = 1; i < ev.size(); ++i)
            if (ev[i].real() < lowest.real()) lowest = ev[i];
        CHECK(lowest.real() < 0.0);
        CHECK(std::abs(lowest - ref) < 1e-6);
    }
}

TEST_CASE("binary matrix round trip") {
    auto p = reference(51);
    const auto op = p.assemble(0.0, cplx(0.0, 0.05));
    const auto path = (std::filesystem::temp_directory_path() / "lsd_test_matrix.bin").string();
    write_matrix_binary(op.matrix, 1, path);
    CHECK(std::filesystem::file_size(path) == 8 + 24 + 16 * 51 * 51);
    const auto back = read_matrix_binary(path);
    CHECK((back - op.matrix).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("slowly decaying transform triggers the tail check") {
    auto j = reference_json(101);
    j["potential"]["b"] = 50.0;
    Pipeline p(parse_scenario(j));
    try {
        p.assemble(0.0, 0.0);
        FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GridTooCoarse);
    }
}
