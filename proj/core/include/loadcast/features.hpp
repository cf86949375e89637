#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <absl/time/time.h>

#include "loadcast/ingestion.hpp"
#include "loadcast/model_record.hpp"

namespace loadcast {

/// Local time zone and public holidays of one country.
class Calendar {
public:
    /// Throws ConfigurationError when `zone` is not a known IANA zone.
    Calendar(std::string country, std::string zone, std::set<std::chrono::year_month_day> holidays = {});

    /// Holiday file: one ISO date per line; `#` starts a comment.
    static Calendar parse(std::string country, std::string zone, std::string_view holiday_file);
    static Calendar load(std::string country, std::string zone, const std::filesystem::path& holiday_file);

    const std::string& country() const noexcept { return country_; }
    const std::string& zone_name() const noexcept { return zone_name_; }
    const absl::TimeZone& zone() const noexcept { return zone_; }
    const std::set<std::chrono::year_month_day>& holidays() const noexcept { return holidays_; }

    bool is_holiday(std::chrono::year_month_day local_date) const { return holidays_.contains(local_date); }

private:
    std::string country_;
    std::string zone_name_;
    absl::TimeZone zone_;
    std::set<std::chrono::year_month_day> holidays_;
};

struct CalendarPart {
    int hour_of_day = 0;  // 0..23
    int day_of_week = 0;  // Monday = 0
    int day_of_month = 1; // 1..31
    int month = 1;        // 1..12
    int is_holiday = 0;

    friend bool operator==(const CalendarPart&, const CalendarPart&) = default;
};

CalendarPart calendar_features(Timestamp t, const Calendar& calendar);

/// Column names, in order, fed to basic and advanced models.
const std::vector<std::string>& feature_schema(ModelKind kind);

struct FeatureRow {
    Timestamp target_time;
    int horizon = 1;
    CalendarPart calendar;
    std::optional<double> lag_week;       // load at target_time - 168h
    std::optional<double> lag_last_known; // load at target_time - horizon
    ModelKind kind = ModelKind::basic;

    /// Model input in feature_schema(kind) order.
    std::vector<double> values() const;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Present actual loads of an hourly series keyed by UTC hour.
class HourlyLookup {
public:
    explicit HourlyLookup(const LoadSeries& hourly);

    std::optional<double> at(Timestamp hour) const;

    std::optional<Timestamp> first_hour() const noexcept { return first_; }
    std::optional<Timestamp> last_hour() const noexcept { return last_; }

private:
    std::unordered_map<std::int64_t, double> values_;
    std::optional<Timestamp> first_;
    std::optional<Timestamp> last_;
};

struct TrainingRows {
    std::vector<FeatureRow> advanced;
    std::vector<double> advanced_targets;
    std::vector<FeatureRow> basic;
    std::vector<double> basic_targets;
    /// Hours with a present actual load.
    std::size_t candidates = 0;
};

/// One candidate per hour with a present actual load. Every candidate becomes
/// a basic row; it becomes an advanced row only when both lags are present.
/// Throws InvalidInput for a non-hourly series or horizon outside 1..24, and
/// InsufficientData when no hour carries a target at all.
TrainingRows build_training_rows(const LoadSeries& hourly, const Calendar& calendar, int horizon);

/// Number of weekly steps tried when imputing a missing lag.
inline constexpr int kImputationWeeks = 6;

/// Inference row for `target_time`. Each lag walks back one week at a time,
/// up to six attempts; if either stays absent the row falls back to basic.
FeatureRow build_inference_row(const HourlyLookup& lookup, const Calendar& calendar, Timestamp target_time,
                               int horizon);
FeatureRow build_inference_row(const LoadSeries& hourly, const Calendar& calendar, Timestamp target_time,
                               int horizon);

} // namespace loadcast
