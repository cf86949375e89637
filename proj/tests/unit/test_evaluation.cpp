#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "loadcast/errors.hpp"
#include "loadcast/evaluation.hpp"
#include "loadcast/stats.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

using namespace loadcast;
using testing_support::hourly_series;

namespace {

const std::string kCz = "10YCZ-CEPS-----N";
const auto kT0 = parse_timestamp("2015-03-01T00:00Z");

ForecastRecord record(Timestamp issued, int horizon, double point) {
    ForecastRecord r;
    r.country = kCz;
    r.issued_at = issued;
    r.target_time = issued + std::chrono::hours{horizon};
    r.horizon = horizon;
    r.kind = ModelKind::advanced;
    r.point = point;
    return r;
}

} // namespace

TEST(Mape, Examples) {
    const std::vector<double> a{100, 200};
    EXPECT_EQ(mape(a, a), 0.0);
    EXPECT_DOUBLE_EQ(mape(std::vector<double>{95, 210}, a), 5.0);
    EXPECT_EQ(mape(std::vector<double>{0}, std::vector<double>{100}), 100.0);
}

TEST(Mape, Errors) {
    EXPECT_THROW(mape(std::vector<double>{1, 2}, std::vector<double>{1}), InvalidInput);
    EXPECT_THROW(mape(std::vector<double>{}, std::vector<double>{}), InvalidInput);
    EXPECT_THROW(mape(std::vector<double>{1}, std::vector<double>{0}), InvalidInput);
}

TEST(Mape, ScaleInvariant) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(50, 150);
    std::vector<double> f(40);
    std::vector<double> a(40);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = u(rng);
        a[i] = u(rng);
    }
    const double base = mape(f, a);
    for (double c : {0.001, 2.0, 1e6}) {
        std::vector<double> fc(f);
        std::vector<double> ac(a);
        for (std::size_t i = 0; i < f.size(); ++i) {
            fc[i] *= c;
            ac[i] *= c;
        }
        EXPECT_NEAR(mape(fc, ac), base, 1e-12 * base);
    }
}

TEST(Pinball, ExamplesAndProperties) {
    EXPECT_EQ(pinball_loss(50, 10, 20), 5.0);
    EXPECT_EQ(pinball_loss(37, 12.5, 12.5), 0.0);
    EXPECT_NEAR(pinball_loss(10, 5, 2), 2.7, 1e-12);
    EXPECT_THROW(pinball_loss(0, 1, 1), InvalidInput);
    EXPECT_THROW(pinball_loss(100, 1, 1), InvalidInput);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 200; ++i) {
        const double q = u(rng);
        const double y = u(rng);
        EXPECT_DOUBLE_EQ(pinball_loss(50, q, y), 0.5 * std::abs(y - q));
        for (int alpha : {1, 37, 99}) {
            EXPECT_GT(pinball_loss(alpha, q, y), 0.0);
        }
    }
}

TEST(Pinball, AverageOverPresentQuantiles) {
    EXPECT_DOUBLE_EQ(pinball({{10, 5.0}, {50, 10.0}}, 20.0), (0.1 * 15.0 + 0.5 * 10.0) / 2.0);
    const auto summary = pinball_batch({{{50, 10.0}}, {{50, 30.0}}}, std::vector<double>{20.0, 20.0});
    EXPECT_DOUBLE_EQ(summary.average, 5.0);
    EXPECT_DOUBLE_EQ(summary.per_quantile.at(50), 5.0);
}

TEST(ErrorStats, ExamplesAgainstDirectComputation) {
    const auto s = error_stats(std::vector<double>{1, 2, 3});
    EXPECT_EQ(s.mean, 2.0);
    EXPECT_EQ(s.p50, 2.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 3.0);
    EXPECT_DOUBLE_EQ(s.std, 1.0);

    const auto c = error_stats(std::vector<double>{4, 4, 4, 4});
    EXPECT_EQ(c.std, 0.0);
    EXPECT_EQ(c.p25, 4.0);
    EXPECT_EQ(c.p75, 4.0);
    EXPECT_THROW(error_stats(std::vector<double>{}), InvalidInput);

    std::mt19937 rng(5);
    std::exponential_distribution<double> e(0.3);
    std::vector<double> v(101);
    for (auto& x : v) {
        x = e(rng);
    }
    const auto r = error_stats(v);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    EXPECT_NEAR(r.mean, mean, 1e-12);
    EXPECT_NEAR(r.std, std::sqrt(ss / static_cast<double>(v.size() - 1)), 1e-12);
    EXPECT_EQ(r.p25, oracle::percentile(v, 25));
    EXPECT_EQ(r.p75, oracle::percentile(v, 75));
    EXPECT_LE(r.min, r.p25);
    EXPECT_LE(r.p25, r.p50);
    EXPECT_LE(r.p50, r.p75);
    EXPECT_LE(r.p75, r.max);
}

TEST(ErrorStats, PublishedRowIsRightSkewed) {
    // Germany's published row: mean 5.17, median 2.747.
    const ErrorStats de{0, 5.17, 8.015, 0.001, 1.267, 2.747, 5.307, 116.77};
    EXPECT_GT(de.mean, de.p50);
}

TEST(Histogram, FixedBinsWithOverflow) {
    const auto bins = histogram(std::vector<double>{0.2, 0.9, 1.0, 2.5, 70.0}, 1.0, 3.0);
    ASSERT_EQ(bins.size(), 4U);
    EXPECT_EQ(bins[0].count, 2U);
    EXPECT_EQ(bins[1].count, 1U);
    EXPECT_EQ(bins[2].count, 1U);
    EXPECT_EQ(bins[3].lower, 3.0);
    EXPECT_EQ(bins[3].count, 1U);
}

TEST(HorizonTableTest, PerfectAndTwoRow) {
    Actuals actuals{{kT0 + std::chrono::hours{1}, 100.0}, {kT0 + std::chrono::hours{24}, 200.0}};
    const std::vector<ForecastRecord> perfect{record(kT0, 1, 100.0), record(kT0, 24, 200.0)};
    const auto t = horizon_table(perfect, {{kCz, actuals}});
    ASSERT_EQ(t.cells.size(), 2U);
    EXPECT_EQ(t.cells.at(1).at(kCz), 0.0);
    EXPECT_EQ(t.cells.at(24).at(kCz), 0.0);

    const std::vector<ForecastRecord> off{record(kT0, 1, 110.0), record(kT0, 24, 150.0)};
    const auto u = horizon_table(off, {{kCz, actuals}});
    EXPECT_DOUBLE_EQ(u.cells.at(1).at(kCz), 10.0);
    EXPECT_DOUBLE_EQ(u.cells.at(24).at(kCz), 25.0);
    EXPECT_EQ(u.render(), horizon_table(off, {{kCz, actuals}}).render());
}

TEST(Compare, IdenticalTablesHaveZeroDeltas) {
    MonthTable m;
    m.set("CZ", 3, 3.409);
    m.set("CZ", 4, 2.958);
    const auto report = benchmark_compare(m, m);
    for (const auto& c : report.cells) {
        EXPECT_EQ(c.delta(), 0.0);
    }
}

TEST(Compare, DeltaAndUnavailableCells) {
    MonthTable model;
    MonthTable bench;
    model.set("CZ", 3, 3.409);
    bench.set("CZ", 3, 5.429);
    model.set("IT", 8, std::nullopt);
    bench.set("IT", 8, std::nullopt);
    const auto report = benchmark_compare(model, bench);
    ASSERT_NE(report.find("CZ", 3), nullptr);
    EXPECT_NEAR(*report.find("CZ", 3)->delta(), -2.020, 1e-12);
    // The grid spans every country and month present in either table.
    EXPECT_EQ(report.unavailable().size(), 3U);
    ASSERT_NE(report.find("IT", 8), nullptr);
    EXPECT_FALSE(report.find("IT", 8)->available());
    EXPECT_FALSE(report.find("IT", 8)->delta().has_value());
    EXPECT_EQ(month_name(3), "Mar");
}

TEST(Evaluate, ScoresRecordsAndBenchmark) {
    auto s = hourly_series(kCz, kT0, 48, [](int) { return 100.0; });
    for (auto& o : s.observations) {
        o.day_ahead_forecast = 90.0;
    }
    s.observations[5].actual_load.reset();
    std::vector<ForecastRecord> records;
    for (int h = 1; h <= 24; ++h) {
        records.push_back(record(kT0, h, h % 2 == 0 ? 104.0 : 98.0));
    }
    const Period period{kT0, kT0 + std::chrono::hours{48}};
    const auto r = evaluate(kCz, records, s, period);
    EXPECT_EQ(r.pairs, 23U);
    // Twelve even horizons at 4% and eleven odd ones at 2%, hour 5 has no actual.
    EXPECT_NEAR(r.mape, (12 * 4.0 + 11 * 2.0) / 23.0, 1e-12);
    ASSERT_TRUE(r.benchmark_mape.has_value());
    EXPECT_NEAR(*r.benchmark_mape, 10.0, 1e-12);
    EXPECT_EQ(r.monthly_mape.size(), 1U);
    EXPECT_FALSE(r.pinball.has_value());

    const auto only = evaluate(kCz, records, s, period, 2);
    EXPECT_EQ(only.pairs, 1U);
    EXPECT_NEAR(only.mape, 4.0, 1e-12);
    EXPECT_THROW(evaluate(kCz, records, s, {kT0 + std::chrono::hours{30}, kT0 + std::chrono::hours{40}}),
                 InsufficientData);
}

TEST(Evaluate, PinballFromDeciles) {
    const auto s = hourly_series(kCz, kT0, 4, [](int) { return 100.0; });
    auto r = record(kT0, 1, 100.0);
    r.deciles = std::array<double, 9>{60, 70, 80, 90, 100, 110, 120, 130, 140};
    const std::vector<ForecastRecord> records{r};
    const auto result = evaluate(kCz, records, s, {kT0, kT0 + std::chrono::hours{4}});
    ASSERT_TRUE(result.pinball.has_value());
    double expected = 0.0;
    for (int k = 0; k < 9; ++k) {
        expected += pinball_loss(kDeciles[k], (*r.deciles)[static_cast<std::size_t>(k)], 100.0);
    }
    EXPECT_NEAR(result.pinball->average, expected / 9.0, 1e-12);
}

TEST(MonthKey, Utc) {
    EXPECT_EQ(month_key(parse_timestamp("2015-03-31T23:00Z")), "2015-03");
    EXPECT_EQ(month_key(parse_timestamp("2015-04-01T00:00Z")), "2015-04");
}
