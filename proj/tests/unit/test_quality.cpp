#include <gtest/gtest.h>

#include <random>

#include "loadcast/errors.hpp"
#include "loadcast/quality.hpp"
#include "synthetic.hpp"

using namespace loadcast;
using testing_support::hourly_series;

namespace {

const auto kStart = parse_timestamp("2015-03-01T00:00Z");

Period hours_from(Timestamp start, int hours) {
    return {start, start + std::chrono::hours{hours}};
}

// Independent count over the slots of the period.
std::int64_t count_bad(const LoadSeries& s, const Period& p) {
    std::int64_t bad = 0;
    for (auto t = p.start; t < p.end; t += std::chrono::hours{1}) {
        const LoadObservation* found = nullptr;
        for (const auto& o : s.observations) {
            if (o.interval_start == t) {
                found = &o;
            }
        }
        if (found == nullptr) {
            bad += 2;
            continue;
        }
        bad += !found->actual_load || *found->actual_load == 0.0;
        bad += !found->day_ahead_forecast || *found->day_ahead_forecast == 0.0;
    }
    return bad;
}

} // namespace

TEST(Audit, CleanSeriesScoresHundred) {
    const auto s = hourly_series("10YCZ-CEPS-----N", kStart, 240, [](int i) { return 5000.0 + i; });
    const auto r = audit(s, hours_from(kStart, 240));
    EXPECT_EQ(r.expected_slots, 240);
    EXPECT_EQ(r.bad_cells(), 0);
    EXPECT_EQ(r.overall_score(), 100.0);
    EXPECT_EQ(format_percent(r.target_na_pct() / 100.0, 2), "0.00%");
}

TEST(Audit, TenPercentTargetNa) {
    auto s = hourly_series("10YCZ-CEPS-----N", kStart, 240, [](int i) { return 5000.0 + i; });
    for (int i = 0; i < 240; i += 10) {
        s.observations[static_cast<std::size_t>(i)].actual_load.reset();
    }
    const auto r = audit(s, hours_from(kStart, 240));
    EXPECT_EQ(r.target_na, 24);
    EXPECT_EQ(r.target_na_pct(), 10.0);
    EXPECT_EQ(r.overall_score(), 95.0);
}

TEST(Audit, ZerosCountPerColumn) {
    auto s = hourly_series("10YCZ-CEPS-----N", kStart, 10, [](int) { return 1.0; });
    s.observations[2].day_ahead_forecast = 0.0;
    s.observations[3].actual_load = 0.0;
    s.observations[4].day_ahead_forecast.reset();
    const auto r = audit(s, hours_from(kStart, 10));
    EXPECT_EQ(r.forecast_zero, 1);
    EXPECT_EQ(r.target_zero, 1);
    EXPECT_EQ(r.forecast_na, 1);
    EXPECT_EQ(r.target_na, 0);
    EXPECT_DOUBLE_EQ(r.overall_score(), 100.0 * (1.0 - 3.0 / 20.0));
}

TEST(Audit, MissingSlotsAreNaInBothColumns) {
    const auto s = hourly_series("10YCZ-CEPS-----N", kStart + std::chrono::hours{2}, 6, [](int) { return 1.0; });
    const auto r = audit(s, hours_from(kStart, 10));
    EXPECT_EQ(r.target_na, 4);
    EXPECT_EQ(r.forecast_na, 4);
    EXPECT_EQ(r.overall_score(), 60.0);
}

TEST(Audit, EmptyPeriodIsInvalid) {
    const auto s = hourly_series("10YCZ-CEPS-----N", kStart, 10, [](int) { return 1.0; });
    EXPECT_THROW(audit(s, {kStart, kStart}), InvalidInput);
    EXPECT_THROW(audit(s, {kStart + std::chrono::hours{1}, kStart}), InvalidInput);
}

TEST(Audit, RandomMasksMatchHandCountAndProperties) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> cell(0, 5);
    for (int rep = 0; rep < 50; ++rep) {
        auto s = hourly_series("10YCZ-CEPS-----N", kStart, 96, [](int i) { return 100.0 + i; });
        std::vector<LoadObservation> kept;
        for (auto o : s.observations) {
            switch (cell(rng)) {
            case 0: o.actual_load.reset(); break;
            case 1: o.day_ahead_forecast = 0.0; break;
            case 2: continue;
            default: break;
            }
            kept.push_back(o);
        }
        s.observations = kept;
        const Period whole = hours_from(kStart, 96);
        const auto r = audit(s, whole);
        ASSERT_EQ(r.bad_cells(), count_bad(s, whole));
        EXPECT_GE(r.overall_score(), 0.0);
        EXPECT_LE(r.overall_score(), 100.0);

        const auto split = kStart + std::chrono::hours{1 + rep};
        const auto pooled = combine(audit(s, {kStart, split}), audit(s, {split, whole.end}));
        EXPECT_EQ(pooled.expected_slots, r.expected_slots);
        EXPECT_EQ(pooled.bad_cells(), r.bad_cells());
        EXPECT_EQ(pooled.overall_score(), r.overall_score());

        for (auto& o : s.observations) {
            if (o.actual_load && *o.actual_load != 0.0) {
                o.actual_load.reset();
                EXPECT_LE(audit(s, whole).overall_score(), r.overall_score());
                break;
            }
        }
    }
}

TEST(FormatPercent, TableStyles) {
    EXPECT_EQ(format_percent(0.982, 1), "98.2%");
    EXPECT_EQ(format_percent(0.0054, 2), "0.54%");
    EXPECT_EQ(format_percent(1.0, 1), "100.0%");
}

TEST(Countries, KnownAndUnknownCodes) {
    EXPECT_EQ(country_name("10YCZ-CEPS-----N"), "Czech Republic");
    EXPECT_EQ(country_label("10YCZ-CEPS-----N"), "CZ");
    EXPECT_EQ(country_zone("10YCZ-CEPS-----N"), "Europe/Prague");
    EXPECT_EQ(country_name("XX"), "XX");
    EXPECT_EQ(country_zone("XX"), "");
}

TEST(Render, PerfectCountryRowAndOrdering) {
    const auto cz = hourly_series("10YCZ-CEPS-----N", kStart, 24, [](int) { return 1.0; });
    const auto at = hourly_series("10YAT-APG------L", kStart, 24, [](int) { return 1.0; });
    const auto period = hours_from(kStart, 24);
    const auto text = render_report({audit(cz, period), audit(at, period)});
    EXPECT_NE(text.find("100.0%  Hourly\n"), std::string::npos);
    EXPECT_LT(text.find("Austria"), text.find("Czech Republic"));
    EXPECT_EQ(text, render_report({audit(at, period), audit(cz, period)}));
}

TEST(QualityJson, CarriesPercentagesAndScore) {
    auto s = hourly_series("10YCZ-CEPS-----N", kStart, 240, [](int) { return 1.0; });
    s.observations[0].actual_load.reset();
    const auto doc = to_json(audit(s, hours_from(kStart, 240)));
    EXPECT_EQ(doc.at("country"), "10YCZ-CEPS-----N");
    EXPECT_EQ(doc.at("expected_slots"), 240);
}
