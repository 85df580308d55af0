#include <benchmark/benchmark.h>

#include <cmath>

#include "relsim/distributions.hpp"
#include "relsim/gp.hpp"
#include "relsim/models.hpp"
#include "relsim/normal.hpp"
#include "relsim/subset_sim.hpp"

namespace {

using namespace relsim;

void BM_StdNormalQuantile(benchmark::State& state) {
    double p = 1e-9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(std_normal_quantile(p));
        p += 1e-12;
    }
}
BENCHMARK(BM_StdNormalQuantile);

void BM_BoreholeEval(benchmark::State& state) {
    const ParameterSpace space = borehole_space();
    RandomStream rng(1);
    const InputSample x = sample(space, rng);
    for (auto _ : state) benchmark::DoNotOptimize(borehole_flow(x));
}
BENCHMARK(BM_BoreholeEval);

void BM_SampleBorehole(benchmark::State& state) {
    const ParameterSpace space = borehole_space();
    RandomStream rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample(space, rng));
}
BENCHMARK(BM_SampleBorehole);

void BM_MhStep(benchmark::State& state) {
    RandomStream rng(2);
    std::vector<double> u(8, 0.5);
    for (auto _ : state) {
        u = mh_step_u(u, rng, 1.0);
        benchmark::DoNotOptimize(u);
    }
}
BENCHMARK(BM_MhStep);

void BM_RunningQuantile(benchmark::State& state) {
    RandomStream rng(3);
    for (auto _ : state) {
        state.PauseTiming();
        RunningQuantile rq(0.9);
        state.ResumeTiming();
        for (int i = 0; i < 1000; ++i) rq.push(rng.next());
        benchmark::DoNotOptimize(rq.value());
    }
}
BENCHMARK(BM_RunningQuantile);

GpModel make_gp(int n, int dim) {
    Eigen::MatrixXd X(n, dim);
    Eigen::VectorXd y(n);
    RandomStream rng(4);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) X(i, j) = rng.next() * 4.0 - 2.0;
        y[i] = std::sin(X.row(i).sum());
    }
    KernelParams p;
    p.amplitude = 1.0;
    p.length_scales = Eigen::VectorXd::Ones(dim);
    p.nugget = 1e-8;
    return GpModel::from_params(X, y, p, /*standardize=*/true);
}

void BM_GpPredict(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const GpModel m = make_gp(n, 8);
    RandomStream rng(5);
    Eigen::VectorXd x(8);
    for (auto _ : state) {
        for (int j = 0; j < 8; ++j) x[j] = rng.next() * 4.0 - 2.0;
        benchmark::DoNotOptimize(m.predict(x));
    }
}
BENCHMARK(BM_GpPredict)->Arg(12)->Arg(100)->Arg(400);

void BM_GpAddPoint(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    RandomStream rng(6);
    for (auto _ : state) {
        state.PauseTiming();
        GpModel m = make_gp(n, 8);
        Eigen::VectorXd x(8);
        for (int j = 0; j < 8; ++j) x[j] = rng.next() * 4.0 - 2.0;
        state.ResumeTiming();
        m.add_point(x, 0.3, /*refit_hyperparams=*/false);
        benchmark::DoNotOptimize(m.size());
    }
}
BENCHMARK(BM_GpAddPoint)->Arg(100)->Arg(400);

} // namespace

BENCHMARK_MAIN();
