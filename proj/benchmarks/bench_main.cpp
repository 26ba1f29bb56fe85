#include <numbers>

#include <benchmark/benchmark.h>

#include "obscert/bernstein.hpp"
#include "obscert/certifier.hpp"
#include "obscert/levy_symbol.hpp"
#include "obscert/rates.hpp"
#include "obscert/simgroup.hpp"
#include "obscert/verify.hpp"

using namespace obscert;

namespace {

constexpr double kPi = std::numbers::pi;

ThickSetSpec slabs() {
    ThickSetSpec s;
    s.pattern = ThickSetSpec::Pattern::PeriodicSlabs;
    s.period = kPi / 4;
    s.width = kPi / 16;
    s.rho = 0.25;
    s.L = {kPi / 4};
    return s;
}

void BM_SolveLambdaT(benchmark::State& st) {
    const auto g = RateFunction::log_power(2.0);
    for (auto _ : st) benchmark::DoNotOptimize(solve_lambda_T(RateFunction::identity(), g, RateFunction::identity(), 0.5));
}
BENCHMARK(BM_SolveLambdaT);

void BM_CertifyWithTrace(benchmark::State& st) {
    ProblemData p;
    p.g = RateFunction::polynomial(1.0, 2.0);
    for (auto _ : st) {
        const auto c = certify(p);
        benchmark::DoNotOptimize(iteration_trace(c, p, 40));
    }
}
BENCHMARK(BM_CertifyWithTrace);

void BM_PhiEvalTriplet(benchmark::State& st) {
    const auto phi = BernsteinFunction::from_triplet(
        {0.0, 0.0, HalfLineMeasure::from_density([](double t) { return std::pow(t, -1.75); })});
    double lam = 1.0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(phi_eval(phi, lam));
        lam = lam > 1e5 ? 1e-3 : lam * 1.7;
    }
}
BENCHMARK(BM_PhiEvalTriplet);

void BM_RePsiQuadrature(benchmark::State& st) {
    const auto m = SymbolModel::fractional_stable(static_cast<int>(st.range(0)), 0.75);
    Eigen::VectorXd xi = Eigen::VectorXd::Constant(st.range(0), 3.0);
    for (auto _ : st) benchmark::DoNotOptimize(re_psi_quadrature(m, xi));
}
BENCHMARK(BM_RePsiQuadrature)->Arg(1)->Arg(3);

void BM_GridEvolve(benchmark::State& st) {
    const GridModel m(SymbolModel::fractional_stable(2, 0.75), 2 * kPi, static_cast<int>(st.range(0)));
    const cvec f = cvec::Random(static_cast<Eigen::Index>(m.geometry().size()));
    for (auto _ : st) benchmark::DoNotOptimize(m.evolve_field(f, 0.1));
}
BENCHMARK(BM_GridEvolve)->Arg(32)->Arg(128);

void BM_OptimalConstant(benchmark::State& st) {
    const DiagonalModel m(static_cast<int>(st.range(0)), RateFunction::log_power(2.0));
    const auto E = make_thick_set(m.geometry(), slabs());
    for (auto _ : st) benchmark::DoNotOptimize(optimal_constant_l2(m, E, 1.0, 256));
}
BENCHMARK(BM_OptimalConstant)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LsFit(benchmark::State& st) {
    const DiagonalModel m(64, RateFunction::log_power(2.0));
    const auto E = make_thick_set(m.geometry(), slabs());
    for (auto _ : st) benchmark::DoNotOptimize(estimate_ls_constants(m, E, {4, 16, 64, 256}, 100, 1, 1));
}
BENCHMARK(BM_LsFit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
