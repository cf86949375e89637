#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "loadcast/gbrt.hpp"

using namespace loadcast;

namespace {

// Hour-of-day, weekday and month columns plus two lag-like columns.
gbrt::SampleSet load_like(std::size_t n, std::uint32_t seed = 1) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(n * 5);
    for (std::size_t i = 0; i < n; ++i) {
        const double hour = static_cast<double>(i % 24);
        const double day = static_cast<double>((i / 24) % 7);
        const double month = static_cast<double>(1 + (i / (24 * 30)) % 12);
        const double shape = 6000.0 * (1.0 + 0.18 * std::sin(2.0 * M_PI * (hour - 6.0) / 24.0)) - (day >= 5 ? 600.0 : 0.0);
        const double lag_week = shape * (1.0 + 0.03 * noise(rng));
        const double lag_last = shape * (1.0 + 0.03 * noise(rng));
        x.insert(x.end(), {hour, day, month, lag_week, lag_last});
        y.push_back(shape * (1.0 + 0.03 * noise(rng)));
    }
    return {{"hour", "weekday", "month", "lag_week", "lag_last"}, std::move(x), std::move(y)};
}

void BM_FitTree(benchmark::State& state) {
    const auto samples = load_like(static_cast<std::size_t>(state.range(0)));
    const gbrt::TreeParams params{static_cast<int>(state.range(1)), 5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gbrt::fit_tree(samples, params));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitTree)->Args({1000, 5})->Args({4000, 5})->Args({4000, 7})->Unit(benchmark::kMillisecond);

void BM_FitBasic(benchmark::State& state) {
    const auto samples = load_like(static_cast<std::size_t>(state.range(0)));
    const gbrt::BoostConfig config{50, 0.1, 5, 5, gbrt::Loss::squared()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gbrt::fit(samples, config));
    }
}
BENCHMARK(BM_FitBasic)->Arg(1344)->Arg(4368)->Unit(benchmark::kMillisecond);

void BM_FitAdvanced(benchmark::State& state) {
    const auto samples = load_like(static_cast<std::size_t>(state.range(0)));
    const gbrt::BoostConfig config{100, 0.1, 7, 5, gbrt::Loss::squared()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gbrt::fit(samples, config));
    }
}
BENCHMARK(BM_FitAdvanced)->Arg(1344)->Arg(4368)->Unit(benchmark::kMillisecond);

void BM_FitDecile(benchmark::State& state) {
    const auto samples = load_like(1344);
    const gbrt::BoostConfig config{100, 0.1, 3, 50, gbrt::Loss::quantile(static_cast<int>(state.range(0)))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gbrt::fit(samples, config));
    }
}
BENCHMARK(BM_FitDecile)->Arg(10)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
    const auto samples = load_like(2000);
    const auto model = gbrt::fit(samples, {100, 0.1, 7, 5, gbrt::Loss::squared()});
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict(samples.row(i)));
        i = (i + 1) % samples.rows();
    }
}
BENCHMARK(BM_Predict);

void BM_ModelJson(benchmark::State& state) {
    const auto model = gbrt::fit(load_like(2000), {100, 0.1, 7, 5, gbrt::Loss::squared()});
    for (auto _ : state) {
        benchmark::DoNotOptimize(gbrt::model_from_json(nlohmann::json::parse(gbrt::to_json(model).dump())));
    }
}
BENCHMARK(BM_ModelJson)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
