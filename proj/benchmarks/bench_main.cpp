#include <array>
#include <cmath>

#include <benchmark/benchmark.h>

#include "darksearch/estimation.hpp"
#include "darksearch/levy_stats.hpp"
#include "darksearch/quantum_core.hpp"
#include "darksearch/rates.hpp"
#include "darksearch/trajectory.hpp"

using namespace darksearch;

namespace {

const double kRabi = 0.1 / std::sqrt(2.0);

void BM_SteadyState(benchmark::State& state) {
    const quantum::LambdaParams p{kRabi, 1.0, 0.003};
    for (auto _ : state) benchmark::DoNotOptimize(quantum::steady_state(p));
}
BENCHMARK(BM_SteadyState);

void BM_G2ResidualIntegral(benchmark::State& state) {
    const quantum::LambdaParams p{kRabi, 1.0, 0.003};
    for (auto _ : state) benchmark::DoNotOptimize(quantum::g2_residual_integral(p, 0));
}
BENCHMARK(BM_G2ResidualIntegral);

void BM_WaitingTimeRateModel(benchmark::State& state) {
    const rates::RateModel m = rates::characteristic_params(kRabi);
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(trajectory::sample_waiting_time_rate_model(trajectory::draw_detuning(rng, 0.1), m, rng));
}
BENCHMARK(BM_WaitingTimeRateModel);

void BM_WaitingTimeExact(benchmark::State& state) {
    Rng rng(2);
    const quantum::PureState psi = quantum::PureState::basis(0);
    for (auto _ : state) {
        const quantum::LambdaParams p{kRabi, 1.0, trajectory::draw_detuning(rng, 0.1)};
        benchmark::DoNotOptimize(trajectory::sample_waiting_time_exact(psi, p, rng, 6e6));
    }
}
BENCHMARK(BM_WaitingTimeExact);

void BM_Trajectory(benchmark::State& state) {
    const quantum::LambdaParams p{kRabi, 1.0, 0.0};
    trajectory::ProtocolConfig cfg;
    cfg.horizon = static_cast<double>(state.range(0));
    std::uint64_t stream = 0;
    for (auto _ : state) {
        cfg.stream = stream++;
        const std::array<double, 1> at{cfg.horizon};
        benchmark::DoNotOptimize(trajectory::run_checkpoints(cfg, p, at));
    }
}
BENCHMARK(BM_Trajectory)->Arg(100000)->Arg(6000000);

void BM_Dawson(benchmark::State& state) {
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(levy::dawson(x));
        x = x > 50.0 ? 0.0 : x + 0.37;
    }
}
BENCHMARK(BM_Dawson);

void BM_FormFactorQuadrature(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(levy::form_factor_quadrature(3.0, 0.3));
}
BENCHMARK(BM_FormFactorQuadrature);

void BM_FormFactorTableLookup(benchmark::State& state) {
    const levy::FormFactorTable table(0.3);
    double q = 1e-2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(table(q));
        q = q > 500.0 ? 1e-2 : q * 1.07;
    }
}
BENCHMARK(BM_FormFactorTableLookup);

void BM_ScanFisherInformation(benchmark::State& state) {
    const quantum::LambdaParams p{kRabi, 1.0, 0.0};
    estimation::ScanConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(estimation::scan_fisher_information(cfg, p));
}
BENCHMARK(BM_ScanFisherInformation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
