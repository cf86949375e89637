#include "loadcast/features.hpp"

#include <fstream>
#include <sstream>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

constexpr std::chrono::hours kWeek{168};

void check_horizon(int horizon) {
    if (horizon < 1 || horizon > 24) {
        throw InvalidInput("horizon must be in 1..24, got " + std::to_string(horizon));
    }
}

std::chrono::year_month_day parse_date(std::string_view text, std::size_t line) {
    try {
        const auto t = parse_timestamp(text);
        return std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(t)};
    } catch (const InvalidInput&) {
        throw ConfigurationError("holiday file line " + std::to_string(line) + ": malformed date '" +
                                 std::string(text) + "'");
    }
}

} // namespace

Calendar::Calendar(std::string country, std::string zone, std::set<std::chrono::year_month_day> holidays)
    : country_(std::move(country)), zone_name_(std::move(zone)), holidays_(std::move(holidays)) {
    if (zone_name_.empty() || !absl::LoadTimeZone(zone_name_, &zone_)) {
        throw ConfigurationError("unknown time zone '" + zone_name_ + "' for " + country_);
    }
}

Calendar Calendar::parse(std::string country, std::string zone, std::string_view holiday_file) {
    std::set<std::chrono::year_month_day> days;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= holiday_file.size()) {
        auto end = holiday_file.find('\n', start);
        if (end == std::string_view::npos) {
            end = holiday_file.size();
        }
        auto line = holiday_file.substr(start, end - start);
        ++number;
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
            line.remove_suffix(1);
        }
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
            line.remove_prefix(1);
        }
        if (!line.empty()) {
            days.insert(parse_date(line, number));
        }
    }
    return Calendar(std::move(country), std::move(zone), std::move(days));
}

Calendar Calendar::load(std::string country, std::string zone, const std::filesystem::path& holiday_file) {
    std::ifstream in(holiday_file);
    if (!in) {
        throw ConfigurationError("cannot read holiday file " + holiday_file.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(std::move(country), std::move(zone), buf.str());
}

CalendarPart calendar_features(Timestamp t, const Calendar& calendar) {
    const auto info = calendar.zone().At(absl::FromUnixSeconds(unix_seconds(t)));
    const auto& cs = info.cs;
    CalendarPart part;
    part.hour_of_day = cs.hour();
    part.day_of_week = static_cast<int>(absl::GetWeekday(cs)); // absl: monday == 0
    part.day_of_month = cs.day();
    part.month = cs.month();
    const std::chrono::year_month_day local{std::chrono::year{static_cast<int>(cs.year())},
                                            std::chrono::month{static_cast<unsigned>(cs.month())},
                                            std::chrono::day{static_cast<unsigned>(cs.day())}};
    part.is_holiday = calendar.is_holiday(local) ? 1 : 0;
    return part;
}

const std::vector<std::string>& feature_schema(ModelKind kind) {
    static const std::vector<std::string> basic{"hour_of_day", "day_of_week", "day_of_month", "month", "is_holiday"};
    static const std::vector<std::string> advanced{"hour_of_day", "day_of_week",   "day_of_month",  "month",
                                                   "is_holiday",  "lag_week",      "lag_last_known"};
    return kind == ModelKind::basic ? basic : advanced;
}

std::vector<double> FeatureRow::values() const {
    std::vector<double> v{static_cast<double>(calendar.hour_of_day), static_cast<double>(calendar.day_of_week),
                          static_cast<double>(calendar.day_of_month), static_cast<double>(calendar.month),
                          static_cast<double>(calendar.is_holiday)};
    if (kind == ModelKind::advanced) {
        if (!lag_week || !lag_last_known) {
            throw InvalidInput("advanced feature row is missing a lag");
        }
        v.push_back(*lag_week);
        v.push_back(*lag_last_known);
    }
    return v;
}

HourlyLookup::HourlyLookup(const LoadSeries& hourly) {
    if (hourly.frequency != Frequency::hourly) {
        throw InvalidInput("feature building expects an hourly series");
    }
    values_.reserve(hourly.size());
    for (const auto& o : hourly.observations) {
        if (!first_ || o.interval_start < *first_) {
            first_ = o.interval_start;
        }
        if (!last_ || o.interval_start > *last_) {
            last_ = o.interval_start;
        }
        if (o.actual_load) {
            values_.emplace(unix_seconds(o.interval_start), *o.actual_load);
        }
    }
}

std::optional<double> HourlyLookup::at(Timestamp hour) const {
    const auto it = values_.find(unix_seconds(hour));
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

TrainingRows build_training_rows(const LoadSeries& hourly, const Calendar& calendar, int horizon) {
    check_horizon(horizon);
    const HourlyLookup lookup(hourly);
    const std::chrono::hours lead{horizon};
    TrainingRows out;
    for (const auto& o : hourly.observations) {
        if (!o.actual_load) {
            continue;
        }
        ++out.candidates;
        FeatureRow row;
        row.target_time = o.interval_start;
        row.horizon = horizon;
        row.calendar = calendar_features(o.interval_start, calendar);
        row.kind = ModelKind::basic;
        out.basic.push_back(row);
        out.basic_targets.push_back(*o.actual_load);

        row.lag_week = lookup.at(o.interval_start - kWeek);
        row.lag_last_known = lookup.at(o.interval_start - lead);
        if (row.lag_week && row.lag_last_known) {
            row.kind = ModelKind::advanced;
            out.advanced.push_back(row);
            out.advanced_targets.push_back(*o.actual_load);
        }
    }
    if (out.candidates == 0) {
        throw InsufficientData("no hour of " + hourly.country + " carries an actual load", 0, 0);
    }
    return out;
}

FeatureRow build_inference_row(const HourlyLookup& lookup, const Calendar& calendar, Timestamp target_time,
                               int horizon) {
    check_horizon(horizon);
    FeatureRow row;
    row.target_time = target_time;
    row.horizon = horizon;
    row.calendar = calendar_features(target_time, calendar);

    for (int k = 1; k <= kImputationWeeks && !row.lag_week; ++k) {
        row.lag_week = lookup.at(target_time - k * kWeek);
    }
    const auto last_known = target_time - std::chrono::hours{horizon};
    for (int k = 0; k < kImputationWeeks && !row.lag_last_known; ++k) {
        row.lag_last_known = lookup.at(last_known - k * kWeek);
    }
    if (row.lag_week && row.lag_last_known) {
        row.kind = ModelKind::advanced;
    } else {
        row.kind = ModelKind::basic;
        row.lag_week.reset();
        row.lag_last_known.reset();
    }
    return row;
}

FeatureRow build_inference_row(const LoadSeries& hourly, const Calendar& calendar, Timestamp target_time,
                               int horizon) {
    return build_inference_row(HourlyLookup(hourly), calendar, target_time, horizon);
}

} // namespace loadcast
