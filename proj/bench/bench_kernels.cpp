// Serial reference kernels against their OpenMP versions.
#include "lsd/operator.hpp"
#include "lsd/spectra.hpp"

#include <benchmark/benchmark.h>

using namespace lsd;

namespace {

DispersionPair reference_pair() {
    return {DispersionSpec::even_polynomial({0, 1}, 1, 0.7), DispersionSpec::even_polynomial({0, 1}, 1, 0.7)};
}

FlowProblem problem() {
    FlowProblem p;
    p.pair = reference_pair();
    p.xi = CPoint::Constant(1, 0.0);
    return p;
}

void flow_table(benchmark::State& st, bool parallel) {
    const MomentumGrid g{12.0, int(st.range(0)), 1};
    const FlowProblem p = problem();
    for (auto _ : st) {
        FlowTable t = parallel ? build_flow_table(g, p, cplx(0, -0.1)) : build_flow_table_serial(g, p, cplx(0, -0.1));
        benchmark::DoNotOptimize(t.gamma.data());
    }
}

void kernel_fill(benchmark::State& st, bool parallel) {
    const MomentumGrid g{12.0, int(st.range(0)), 1};
    const FlowTable t = build_deformation_table(g, problem(), cplx(0, 0.1));
    const PotentialSpec V = PotentialSpec::gaussian(-0.5, 0.5);
    std::vector<cplx> gamma(t.size()), s(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        gamma[i] = t.gamma[i][0];
        s[i] = std::exp(0.5 * t.log_jac[i]);
    }
    const VectorXcd diag = VectorXcd::Zero(g.points);
    MatrixXcd m;
    for (auto _ : st) {
        if (parallel)
            fill_dilated_matrix(m, V, gamma, s, diag, kernel_weight(g));
        else
            fill_dilated_matrix_serial(m, V, gamma, s, diag, kernel_weight(g));
        benchmark::DoNotOptimize(m.data());
    }
}

void riesz(benchmark::State& st, bool parallel) {
    const MomentumGrid g{12.0, int(st.range(0)), 1};
    const FlowTable t = build_deformation_table(g, problem(), cplx(0, 0.1));
    DeformationParams dp;
    dp.theta = cplx(0, 0.1);
    dp.admissible_R = 1.0;
    const FiberOperator op =
        assemble_H_theta(g, reference_pair(), PotentialSpec::gaussian(-0.5, 0.5), CPoint::Constant(1, 0.0), t, dp);
    const SchurForm schur = schur_form(op.matrix);  // shared factorization; only the node loop is timed
    for (auto _ : st) {
        RieszProjection r = parallel ? riesz_projection(schur, cplx(-0.12, 0), 0.05, 32)
                                     : riesz_projection_serial(schur, cplx(-0.12, 0), 0.05, 32);
        benchmark::DoNotOptimize(r.P.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(flow_table, serial, false)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(flow_table, openmp, true)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(kernel_fill, serial, false)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(kernel_fill, openmp, true)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(riesz, serial, false)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(riesz, openmp, true)->Arg(201)->Arg(801)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
