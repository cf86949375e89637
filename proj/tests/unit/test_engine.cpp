#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "loadcast/engine.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/quality.hpp"
#include "synthetic.hpp"

using namespace loadcast;
using namespace std::chrono;
using testing_support::TempDir;

namespace {

const std::string kCz = "10YCZ-CEPS-----N";

EngineConfig small_config(const std::filesystem::path& dir) {
    EngineConfig c;
    c.data_dir = dir;
    c.basic = {5, 0.1, 3, 5, gbrt::Loss::squared()};
    c.advanced = {8, 0.1, 4, 5, gbrt::Loss::squared()};
    c.decile = {4, 0.1, 2, 20, gbrt::Loss::squared()};
    c.threads = 1;
    return c;
}

LoadSeries series_weeks(int n, std::uint32_t seed = 42) {
    testing_support::SeriesSpec spec;
    spec.hours = 24 * 7 * n;
    spec.seed = seed;
    return testing_support::synthetic_series(spec);
}

Timestamp end_of(const LoadSeries& s) {
    return s.observations.back().interval_end;
}

class EngineTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { spdlog::set_level(spdlog::level::warn); }
};

} // namespace

TEST_F(EngineTest, RebuildRecordCounts) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto s = series_weeks(3);
    engine.store().store_series(s);
    const auto plain = engine.rebuild_models(kCz, end_of(s), false);
    EXPECT_EQ(plain.records.size(), 48U);
    EXPECT_EQ(plain.count(ModelKind::basic), 24U);
    EXPECT_EQ(plain.count(ModelKind::advanced), 24U);
    const auto with = engine.rebuild_models(kCz, end_of(s) + hours{24}, true);
    EXPECT_EQ(with.records.size(), 48U + 9U * 24U);
    EXPECT_EQ(with.count(ModelKind::advanced, true), 9U * 24U);
    for (const auto& r : with.records) {
        EXPECT_EQ(r.trained_at, end_of(s) + hours{24});
    }
    EXPECT_EQ(engine.store().model_count(kCz, 5, ModelKind::advanced), 2U + 9U);
}

TEST_F(EngineTest, UnknownCountryAndShortHistory) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    EXPECT_THROW(engine.rebuild_models(kCz, parse_timestamp("2015-03-01T00:00Z")), NotFound);

    // Five days: basic models only, no lag-week rows.
    auto s = series_weeks(1);
    s.observations.resize(24 * 5);
    engine.store().store_series(s);
    const auto r = engine.rebuild_models(kCz, end_of(s));
    EXPECT_EQ(r.count(ModelKind::basic), 24U);
    EXPECT_EQ(r.count(ModelKind::advanced), 0U);
    EXPECT_FALSE(r.warnings.empty());
    const auto batch = engine.forecast_next_24(kCz, end_of(s));
    ASSERT_EQ(batch.records.size(), 24U);
    for (const auto& rec : batch.records) {
        EXPECT_EQ(rec.kind, ModelKind::basic);
    }
}

TEST_F(EngineTest, ForecastBookkeepingAndDeciles) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto s = series_weeks(3);
    engine.store().store_series(s);
    engine.rebuild_models(kCz, end_of(s), true);
    const auto now = end_of(s) + minutes{37};
    const auto batch = engine.issue_forecasts(kCz, now);
    ASSERT_EQ(batch.records.size(), 24U);
    EXPECT_TRUE(batch.errors.empty());
    for (int h = 1; h <= 24; ++h) {
        const auto& r = batch.records[static_cast<std::size_t>(h - 1)];
        EXPECT_EQ(r.horizon, h);
        EXPECT_EQ(r.target_time, floor<hours>(now) + hours{h});
        EXPECT_EQ(duration_cast<hours>(r.target_time - floor<hours>(r.issued_at)).count(), r.horizon);
        EXPECT_EQ(r.kind, ModelKind::advanced);
        ASSERT_TRUE(r.deciles.has_value());
        EXPECT_TRUE(std::is_sorted(r.deciles->begin(), r.deciles->end()));
    }
    const auto stored = engine.store().forecast_batches(kCz);
    ASSERT_EQ(stored.size(), 1U);
    const auto back = forecast_batch_from_json(stored[0]);
    EXPECT_EQ(back.records.size(), 24U);
    EXPECT_EQ(back.records[3].point, batch.records[3].point);
    EXPECT_EQ(back.records[3].deciles, batch.records[3].deciles);
}

TEST_F(EngineTest, ForecastIsTotalUnderRandomGaps) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto full = series_weeks(3);
    engine.rebuild_models(kCz, full, engine.calendar_for(kCz), end_of(full));
    std::mt19937 rng(17);
    for (double rate : {0.0, 0.3, 0.7, 1.0}) {
        std::bernoulli_distribution gap(rate);
        auto s = full;
        for (auto& o : s.observations) {
            if (gap(rng)) {
                o.actual_load.reset();
            }
        }
        engine.store().store_series(s);
        const auto batch = engine.forecast_next_24(kCz, end_of(s));
        ASSERT_EQ(batch.records.size(), 24U) << "gap rate " << rate;
        EXPECT_TRUE(batch.errors.empty());
        for (const auto& r : batch.records) {
            EXPECT_TRUE(std::isfinite(r.point));
            if (rate == 1.0) {
                EXPECT_EQ(r.kind, ModelKind::basic);
            }
        }
    }
}

TEST_F(EngineTest, NoModelsIsAnErrorPerHorizon) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto s = series_weeks(2);
    engine.store().store_series(s);
    const auto batch = engine.forecast_next_24(kCz, end_of(s));
    EXPECT_TRUE(batch.records.empty());
    EXPECT_EQ(batch.errors.size(), 24U);
}

TEST_F(EngineTest, NewestModelWinsAndSnapshotIsCached) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto s = series_weeks(3);
    engine.store().store_series(s);
    engine.rebuild_models(kCz, end_of(s));
    const auto snap = engine.snapshot(kCz);
    EXPECT_EQ(snap, engine.snapshot(kCz));

    const auto newest = engine.store().find_latest_model(kCz, 1, ModelKind::advanced);
    ModelRecord decoy = newest;
    decoy.trained_at = newest.trained_at - hours{24};
    auto config = newest.model.config();
    config.n_trees = 0;
    decoy.model = gbrt::BoostedModel(-1.0e9, {}, config, newest.model.n_features());
    engine.store().store_model(decoy);
    engine.invalidate(kCz);
    EXPECT_NE(snap, engine.snapshot(kCz));
    const auto batch = engine.forecast_next_24(kCz, end_of(s));
    EXPECT_GT(batch.records.front().point, 0.0);
}

TEST_F(EngineTest, ConcurrentRebuildAndForecastNeverMixGenerations) {
    TempDir dir;
    Engine engine(small_config(dir.path()));
    const auto s = series_weeks(3);
    engine.store().store_series(s);
    engine.rebuild_models(kCz, end_of(s));
    std::atomic<bool> done{false};
    std::jthread rebuilder([&] {
        for (int i = 1; i <= 3; ++i) {
            engine.rebuild_models(kCz, end_of(s) + hours{24 * i});
        }
        done = true;
    });
    int batches = 0;
    while (!done || batches == 0) {
        const auto snap = engine.snapshot(kCz);
        const auto t = snap->find(1, ModelKind::advanced)->trained_at;
        for (int h = 2; h <= 24; ++h) {
            ASSERT_EQ(snap->find(h, ModelKind::advanced)->trained_at, t);
        }
        EXPECT_EQ(engine.forecast_next_24(kCz, end_of(s)).records.size(), 24U);
        ++batches;
    }
}

TEST(DecileRepair, SortsCrossings) {
    const auto fixed = repair_decile_crossing({5, 1, 2, 3, 4, 9, 8, 7, 6});
    EXPECT_TRUE(std::is_sorted(fixed.begin(), fixed.end()));
    EXPECT_EQ(fixed.front(), 1.0);
    EXPECT_EQ(fixed.back(), 9.0);
}

TEST(Config, JsonRoundTripAndValidation) {
    const auto c = engine_config_from_json(nlohmann::json::parse(R"({
        "data_dir": "/tmp/x", "countries": ["10YCZ-CEPS-----N"], "rebuild_time": "00:30",
        "deciles": true, "models": {"advanced": {"n_trees": 120, "max_depth": 6}},
        "listen": "0.0.0.0:9000"})"));
    EXPECT_EQ(c.rebuild_minute, 30);
    EXPECT_TRUE(c.deciles);
    EXPECT_EQ(c.advanced.n_trees, 120);
    EXPECT_EQ(c.advanced.max_depth, 6);
    EXPECT_EQ(c.advanced.min_samples_leaf, 5);
    EXPECT_EQ(c.basic.n_trees, 50);
    EXPECT_EQ(c.listen_port, 9000);
    const auto again = engine_config_from_json(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));

    EXPECT_THROW(engine_config_from_json(nlohmann::json::parse(R"({"rebuild_time": "25:00"})")), ConfigurationError);
    EXPECT_THROW(engine_config_from_json(nlohmann::json::parse(R"({"models": {"basic": {"learning_rate": 0}}})")),
                 ConfigurationError);
    EXPECT_THROW(engine_config_from_json(nlohmann::json::parse(R"({"listen": "nowhere"})")), ConfigurationError);
}

TEST_F(EngineTest, SchedulerRebuildsAtLocalMidnight) {
    TempDir dir;
    auto config = small_config(dir.path());
    config.countries = {kCz};
    Engine engine(config);
    const auto s = series_weeks(3);
    engine.store().store_series(s);
    Scheduler scheduler(engine);
    std::vector<Timestamp> rebuilds;
    std::vector<ForecastBatch> batches;
    scheduler.on_rebuild = [&](const RebuildResult& r) { rebuilds.push_back(r.trained_at); };
    scheduler.on_batch = [&](const ForecastBatch& b) { batches.push_back(b); };

    // Prague is UTC+1 in January: local midnight is 23:00 UTC.
    const auto start = parse_timestamp("2015-01-25T22:10Z");
    for (auto t = start; t <= start + hours{26}; t += minutes{13}) {
        scheduler.tick(t);
    }
    ASSERT_EQ(rebuilds.size(), 2U);
    EXPECT_EQ(rebuilds[0], parse_timestamp("2015-01-25T23:00Z"));
    EXPECT_EQ(rebuilds[1], parse_timestamp("2015-01-26T23:00Z"));
    EXPECT_EQ(batches.size(), 26U);
    EXPECT_EQ(scheduler.stats().batches, 26U);
    EXPECT_EQ(scheduler.stats().rebuild_failures, 0U);
    for (const auto& b : batches) {
        EXPECT_EQ(b.issued_at, floor<hours>(b.issued_at));
    }
}

TEST_F(EngineTest, SchedulerIgnoresBackwardTime) {
    TempDir dir;
    auto config = small_config(dir.path());
    config.countries = {kCz};
    Engine engine(config);
    Scheduler scheduler(engine);
    const auto t = parse_timestamp("2015-01-25T10:30Z");
    scheduler.tick(t);
    scheduler.tick(t - hours{5});
    EXPECT_EQ(scheduler.stats().batches + scheduler.stats().forecast_failures, 0U);
    scheduler.tick(t + minutes{30});
    // One hour boundary passed; no series stored so the batch fails and is counted.
    EXPECT_EQ(scheduler.stats().batches + scheduler.stats().forecast_failures, 1U);
}

#ifdef LOADCAST_SOURCE_DIR
TEST(ShippedFiles, ConfigAndCalendarsLoad) {
    const std::filesystem::path root = LOADCAST_SOURCE_DIR;
    const auto config = load_engine_config(root / "config" / "loadcast.json");
    EXPECT_EQ(config.advanced.max_depth, 7);
    EXPECT_EQ(config.countries.size(), 3U);
    for (const auto& entry : std::filesystem::directory_iterator(root / "data" / "calendars")) {
        const auto country = entry.path().stem().string();
        const auto calendar = Calendar::load(country, country_zone(country), entry.path());
        EXPECT_FALSE(calendar.holidays().empty()) << country;
        EXPECT_TRUE(calendar.is_holiday(year{2015} / January / 1)) << country;
    }
}
#endif
