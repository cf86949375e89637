#include <gtest/gtest.h>

#include "loadcast/errors.hpp"
#include "loadcast/ingestion.hpp"
#include "synthetic.hpp"

using namespace loadcast;
using testing_support::hourly_series;

namespace {

std::string csv(const std::string& body) {
    return std::string(kLoadCsvHeader) + "\n" + body;
}

std::string quarter_rows(const std::string& day, int hour, const std::vector<std::string>& values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto start = parse_timestamp(day + "T00:00Z") + std::chrono::hours{hour} + std::chrono::minutes{15 * k};
        out += format_timestamp(start) + "," + format_timestamp(start + std::chrono::minutes{15}) + ",1," + values[k] +
               "\n";
    }
    return out;
}

} // namespace

TEST(ParseCsv, SingleHourlyRow) {
    const auto s = parse_load_csv(csv("2015-03-01T00:00+01:00,2015-03-01T01:00+01:00,6100,6000\n"), "CZ");
    ASSERT_EQ(s.size(), 1U);
    EXPECT_EQ(s.frequency, Frequency::hourly);
    EXPECT_EQ(s.observations[0].interval_start, parse_timestamp("2015-02-28T23:00Z"));
    EXPECT_EQ(s.observations[0].day_ahead_forecast, 6100.0);
    EXPECT_EQ(s.observations[0].actual_load, 6000.0);
}

TEST(ParseCsv, NotAvailableAndEmptyAreAbsentZeroIsKept) {
    const auto s = parse_load_csv(csv("2015-03-01T00:00Z,2015-03-01T01:00Z,N/A,0\n"
                                      "2015-03-01T01:00Z,2015-03-01T02:00Z,,5\n"),
                                  "CZ");
    ASSERT_EQ(s.size(), 2U);
    EXPECT_FALSE(s.observations[0].day_ahead_forecast.has_value());
    EXPECT_EQ(s.observations[0].actual_load, 0.0);
    EXPECT_FALSE(s.observations[1].day_ahead_forecast.has_value());
}

TEST(ParseCsv, RowsAreSorted) {
    const auto s = parse_load_csv(csv("2015-03-01T01:00Z,2015-03-01T02:00Z,1,1\n"
                                      "2015-03-01T00:00Z,2015-03-01T01:00Z,2,2\n"),
                                  "CZ");
    EXPECT_LT(s.observations[0].interval_start, s.observations[1].interval_start);
    EXPECT_EQ(s.observations[0].actual_load, 2.0);
}

TEST(ParseCsv, ErrorsNameTheRow) {
    const auto row_of = [](const std::string& body) {
        try {
            parse_load_csv(csv(body), "CZ");
        } catch (const ParseError& e) {
            return e.row();
        }
        return std::size_t{0};
    };
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,1,1\n2015-03-01T01:00Z,2015-03-01T02:00Z,-4,1\n"), 2U);
    EXPECT_EQ(row_of("2015-03-01 00:00,2015-03-01T01:00Z,1,1\n"), 1U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,1,1\n2015-03-01T00:00Z,2015-03-01T01:00Z,1,1\n"), 2U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,1,1\n2015-03-01T01:00Z,2015-03-01T01:15Z,1,1\n"), 2U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T00:20Z,1,1\n"), 1U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,1\n"), 1U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,abc,1\n"), 1U);
    EXPECT_EQ(row_of("2015-03-01T00:00Z,2015-03-01T01:00Z,inf,1\n"), 1U);
}

TEST(ParseCsv, HeaderMustMatch) {
    EXPECT_THROW(parse_load_csv("start,end,forecast,actual\n", "CZ"), InvalidInput);
    EXPECT_NO_THROW(parse_load_csv("\xEF\xBB\xBF" + csv(""), "CZ"));
    EXPECT_NO_THROW(parse_load_csv(csv("2015-03-01T00:00Z,2015-03-01T01:00Z,1,1\r\n"), "CZ"));
}

TEST(ParseCsv, RoundTripIsAFixedPoint) {
    testing_support::SeriesSpec spec;
    spec.hours = 100;
    auto s = testing_support::synthetic_series(spec);
    s.observations[3].actual_load.reset();
    s.observations[4].day_ahead_forecast = 0.0;
    const auto once = parse_load_csv(write_load_csv(s), s.country);
    const auto twice = parse_load_csv(write_load_csv(once), s.country);
    EXPECT_EQ(once, twice);
    EXPECT_EQ(write_load_csv(once), write_load_csv(twice));
    EXPECT_EQ(once, s);
}

TEST(DetectFrequency, UniformLengths) {
    EXPECT_EQ(detect_frequency(parse_load_csv(csv(quarter_rows("2015-03-01", 0, {"1", "2", "3"})), "HU")),
              Frequency::quarter_hourly);
    const auto half = parse_load_csv(csv("2015-03-01T00:00Z,2015-03-01T00:30Z,1,1\n"
                                         "2015-03-01T00:30Z,2015-03-01T01:00Z,1,1\n"),
                                     "GB");
    EXPECT_EQ(detect_frequency(half), Frequency::half_hourly);
    EXPECT_EQ(display_name(detect_frequency(half)), "Half-hourly");
    EXPECT_EQ(detect_frequency(hourly_series("CZ", parse_timestamp("2015-01-01T00:00Z"), 3, [](int) { return 1.0; })),
              Frequency::hourly);
}

TEST(DetectFrequency, NeedsTwoObservations) {
    EXPECT_THROW(detect_frequency(hourly_series("CZ", parse_timestamp("2015-01-01T00:00Z"), 1, [](int) { return 1.0; })),
                 InvalidInput);
}

TEST(DetectFrequency, UnsupportedModalLength) {
    LoadSeries s;
    s.country = "CZ";
    const auto t = parse_timestamp("2015-01-01T00:00Z");
    s.observations = {{t, t + std::chrono::minutes{5}, 1.0, 1.0},
                      {t + std::chrono::minutes{5}, t + std::chrono::minutes{10}, 1.0, 1.0}};
    EXPECT_THROW(detect_frequency(s), UnsupportedFrequency);
}

TEST(Aggregate, MeanOfQuarters) {
    const auto h = aggregate_to_hourly(parse_load_csv(csv(quarter_rows("2015-03-01", 0, {"100", "110", "120", "130"})), "HU"));
    ASSERT_EQ(h.size(), 1U);
    EXPECT_EQ(h.frequency, Frequency::hourly);
    EXPECT_EQ(h.observations[0].actual_load, 115.0);
    EXPECT_EQ(h.observations[0].day_ahead_forecast, 1.0);
}

TEST(Aggregate, AbsenceAndIncompleteHoursPropagate) {
    const auto h = aggregate_to_hourly(parse_load_csv(
        csv(quarter_rows("2015-03-01", 0, {"100", "N/A", "120", "130"}) + quarter_rows("2015-03-01", 1, {"1", "2", "3"})),
        "HU"));
    ASSERT_EQ(h.size(), 2U);
    EXPECT_FALSE(h.observations[0].actual_load.has_value());
    EXPECT_FALSE(h.observations[1].actual_load.has_value());
}

TEST(Aggregate, HourlyIsIdentity) {
    const auto s = hourly_series("CZ", parse_timestamp("2015-01-01T00:00Z"), 30, [](int i) { return 10.0 * i; });
    EXPECT_EQ(aggregate_to_hourly(s), s);
}

TEST(Aggregate, HourCountEqualsDistinctClockHours) {
    std::string body;
    for (int h = 0; h < 5; ++h) {
        body += quarter_rows("2015-03-01", h * 2, {"1", "2", "3", "4"});
    }
    const auto q = parse_load_csv(csv(body), "HU");
    EXPECT_EQ(aggregate_to_hourly(q).size(), 5U);
}

TEST(Merge, VerticalFillsHistoryBeforeCutoff) {
    const auto cutoff = default_vertical_cutoff();
    auto vertical = hourly_series("CZ", cutoff - std::chrono::hours{48}, 72, [](int) { return 100.0; });
    vertical.source = SourceKind::vertical_load;
    auto total = hourly_series("CZ", cutoff, 48, [](int) { return 200.0; });
    const auto merged = merge_load_sources(total, vertical, cutoff);
    ASSERT_EQ(merged.size(), 96U);
    EXPECT_EQ(merged.source, SourceKind::total_load);
    EXPECT_EQ(merged.observations.front().interval_start, cutoff - std::chrono::hours{48});
    for (const auto& o : merged.observations) {
        EXPECT_EQ(o.actual_load, o.interval_start < cutoff ? 100.0 : 200.0);
        if (o.interval_start < cutoff) {
            EXPECT_FALSE(o.day_ahead_forecast.has_value());
        }
    }
}

TEST(Merge, EmptyVerticalIsIdentity) {
    const auto total = hourly_series("CZ", parse_timestamp("2014-12-30T00:00Z"), 72, [](int i) { return i + 1.0; });
    LoadSeries vertical;
    vertical.country = "CZ";
    vertical.source = SourceKind::vertical_load;
    EXPECT_EQ(merge_load_sources(total, vertical, default_vertical_cutoff()).observations, total.observations);
}

TEST(Merge, CountryMismatch) {
    const auto a = hourly_series("CZ", parse_timestamp("2015-01-01T00:00Z"), 2, [](int) { return 1.0; });
    const auto b = hourly_series("SK", parse_timestamp("2015-01-01T00:00Z"), 2, [](int) { return 1.0; });
    EXPECT_THROW(merge_load_sources(a, b, default_vertical_cutoff()), InvalidInput);
}

TEST(Upsert, NewRowsWinAndOrderIsKept) {
    const auto t = parse_timestamp("2015-01-01T00:00Z");
    const auto base = hourly_series("CZ", t, 4, [](int) { return 1.0; });
    const auto update = hourly_series("CZ", t + std::chrono::hours{2}, 4, [](int) { return 2.0; });
    const auto merged = upsert(base, update);
    ASSERT_EQ(merged.size(), 6U);
    EXPECT_EQ(merged.observations[1].actual_load, 1.0);
    EXPECT_EQ(merged.observations[2].actual_load, 2.0);
    EXPECT_EQ(upsert(merged, update), merged);
}

TEST(SeriesJson, RoundTrip) {
    auto s = hourly_series("CZ", parse_timestamp("2015-01-01T00:00Z"), 5, [](int i) {
        return i == 2 ? std::nullopt : std::optional<double>(0.1 * i);
    });
    EXPECT_EQ(series_from_json(nlohmann::json::parse(to_json(s).dump())), s);
}
