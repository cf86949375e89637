#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "loadcast/engine.hpp"
#include "loadcast/features.hpp"
#include "loadcast/ingestion.hpp"

using namespace loadcast;

namespace {

const std::string kCz = "10YCZ-CEPS-----N";

LoadSeries hourly(int hours, Frequency frequency = Frequency::hourly) {
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 0.03);
    LoadSeries s;
    s.country = kCz;
    s.frequency = frequency;
    const auto step = interval_length(frequency);
    const auto start = parse_timestamp("2015-01-05T00:00Z");
    const int slots = hours * static_cast<int>(std::chrono::hours{1} / step);
    for (int i = 0; i < slots; ++i) {
        const auto t = start + i * step;
        const double h = static_cast<double>(i) * static_cast<double>(step.count()) / 60.0;
        const double shape = 6000.0 * (1.0 + 0.18 * std::sin(2.0 * M_PI * (h - 6.0) / 24.0));
        s.observations.push_back({t, t + step, shape, shape * (1.0 + noise(rng))});
    }
    return s;
}

void BM_ParseCsv(benchmark::State& state) {
    const auto csv = write_load_csv(hourly(static_cast<int>(state.range(0)), Frequency::quarter_hourly));
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_load_csv(csv, kCz));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(csv.size()));
}
BENCHMARK(BM_ParseCsv)->Arg(24 * 7 * 8)->Unit(benchmark::kMillisecond);

void BM_AggregateQuarterHours(benchmark::State& state) {
    const auto q = hourly(24 * 7 * 8, Frequency::quarter_hourly);
    for (auto _ : state) {
        benchmark::DoNotOptimize(aggregate_to_hourly(q));
    }
}
BENCHMARK(BM_AggregateQuarterHours)->Unit(benchmark::kMillisecond);

void BM_TrainingRows(benchmark::State& state) {
    const auto s = hourly(static_cast<int>(state.range(0)));
    const Calendar calendar(kCz, "Europe/Prague");
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_training_rows(s, calendar, 24));
    }
}
BENCHMARK(BM_TrainingRows)->Arg(24 * 7 * 8)->Arg(24 * 7 * 26)->Unit(benchmark::kMillisecond);

void BM_InferenceRow(benchmark::State& state) {
    const auto s = hourly(24 * 7 * 8);
    const HourlyLookup lookup(s);
    const Calendar calendar(kCz, "Europe/Prague");
    const auto target = s.observations.back().interval_end;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_inference_row(lookup, calendar, target, 12));
    }
}
BENCHMARK(BM_InferenceRow);

class EngineFixture : public benchmark::Fixture {
public:
    void SetUp(const benchmark::State&) override {
        if (engine_) {
            return;
        }
        dir_ = std::filesystem::temp_directory_path() / "loadcast-bench";
        std::filesystem::remove_all(dir_);
        EngineConfig config;
        config.data_dir = dir_;
        config.threads = 1;
        engine_ = std::make_unique<Engine>(config);
        series_ = hourly(24 * 7 * 8);
        engine_->store().store_series(series_);
        now_ = series_.observations.back().interval_end;
        engine_->rebuild_models(kCz, now_);
    }

    ~EngineFixture() override {
        if (!dir_.empty()) {
            std::filesystem::remove_all(dir_);
        }
    }

protected:
    std::filesystem::path dir_;
    std::unique_ptr<Engine> engine_;
    LoadSeries series_;
    Timestamp now_;
};

BENCHMARK_DEFINE_F(EngineFixture, ForecastNext24)(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine_->forecast_next_24(kCz, now_));
    }
}
BENCHMARK_REGISTER_F(EngineFixture, ForecastNext24)->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(EngineFixture, RebuildAllHorizons)(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(engine_->rebuild_models(kCz, series_, engine_->calendar_for(kCz), now_));
    }
}
BENCHMARK_REGISTER_F(EngineFixture, RebuildAllHorizons)->Unit(benchmark::kSecond)->Iterations(1);

} // namespace
