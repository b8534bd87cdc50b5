#include "lsd/operator.hpp"
#include "lsd/spectra.hpp"

#include <doctest.h>
#include <omp.h>

using namespace lsd;

namespace {

DispersionPair reference_pair() {
    return {DispersionSpec::even_polynomial({0, 1}, 1, 0.7), DispersionSpec::even_polynomial({0, 1}, 1, 0.7)};
}

FlowProblem problem() {
    FlowProblem p;
    p.pair = reference_pair();
    p.xi = CPoint::Constant(1, 0.3);
    return p;
}

struct Threads {
    int saved = omp_get_max_threads();
    explicit Threads(int n) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("flow table: OpenMP equals the serial reference bitwise") {
    Threads t(4);
    const MomentumGrid g{12.0, 401, 1};
    const auto a = build_flow_table(g, problem(), cplx(0.0, -0.1));
    const auto b = build_flow_table_serial(g, problem(), cplx(0.0, -0.1));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.gamma[i][0] == b.gamma[i][0]);
        CHECK(a.jac[i] == b.jac[i]);
        CHECK(a.log_jac[i] == b.log_jac[i]);
        CHECK(a.jac_arg[i] == b.jac_arg[i]);
    }
}

TEST_CASE("kernel fill: OpenMP equals the serial reference bitwise") {
    Threads t(4);
    const MomentumGrid g{12.0, 301, 1};
    const auto table = build_deformation_table(g, problem(), cplx(0.0, 0.1));
    std::vector<cplx> gamma(table.size()), s(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        gamma[i] = table.gamma[i][0];
        s[i] = std::exp(0.5 * table.log_jac[i]);
    }
    VectorXcd diag(g.points);
    for (int i = 0; i < g.points; ++i) diag[i] = cplx(g.node(i) * g.node(i), -0.01 * i);
    auto V = PotentialSpec::gaussian(-0.5, 0.5);
    V.odd_amplitude = 0.2;
    MatrixXcd a, b;
    fill_dilated_matrix(a, V, gamma, s, diag, kernel_weight(g));
    fill_dilated_matrix_serial(b, V, gamma, s, diag, kernel_weight(g));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Riesz projection: OpenMP equals the serial reference bitwise") {
    Threads t(3);
    const MomentumGrid g{12.0, 201, 1};
    const auto table = build_deformation_table(g, problem(), cplx(0.0, 0.1));
    DeformationParams dp;
    dp.theta = cplx(0.0, 0.1);
    dp.admissible_R = 1.0;
    const auto op = assemble_H_theta(g, reference_pair(), PotentialSpec::gaussian(-0.5, 0.5), CPoint::Constant(1, 0.3),
                                     table, dp);
    const auto schur = schur_form(op.matrix);
    // 37 nodes: the last batch is partial
    const auto a = riesz_projection(schur, cplx(-0.07, 0.0), 0.05, 37);
    const auto b = riesz_projection_serial(schur, cplx(-0.07, 0.0), 0.05, 37);
    CHECK((a.P - b.P).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.rank == b.rank);
}
