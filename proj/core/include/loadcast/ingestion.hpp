#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/timeutil.hpp"

namespace loadcast {

enum class Frequency { hourly, half_hourly, quarter_hourly };

enum class SourceKind { total_load, vertical_load };

std::string_view to_string(Frequency f);
/// Table-style label: "Hourly", "Half-hourly", "Quarter-hourly".
std::string_view display_name(Frequency f);
Frequency frequency_from_string(std::string_view text);
std::chrono::minutes interval_length(Frequency f);
Frequency frequency_for(std::chrono::minutes length);

std::string_view to_string(SourceKind s);
SourceKind source_from_string(std::string_view text);

struct LoadObservation {
    Timestamp interval_start;
    Timestamp interval_end;
    std::optional<double> day_ahead_forecast;
    std::optional<double> actual_load;

    std::chrono::minutes length() const {
        return std::chrono::duration_cast<std::chrono::minutes>(interval_end - interval_start);
    }

    friend bool operator==(const LoadObservation&, const LoadObservation&) = default;
};

struct LoadSeries {
    std::string country;
    Frequency frequency = Frequency::hourly;
    SourceKind source = SourceKind::total_load;
    std::vector<LoadObservation> observations;

    bool empty() const noexcept { return observations.empty(); }
    std::size_t size() const noexcept { return observations.size(); }

    /// Throws InvalidInput when ordering, uniqueness or interval invariants fail.
    void validate() const;

    friend bool operator==(const LoadSeries&, const LoadSeries&) = default;
};

inline constexpr std::string_view kLoadCsvHeader = "interval_start,interval_end,day_ahead_forecast,actual_load";

/// Parses the load export format. Value cells may be a decimal number,
/// `N/A`, or empty (same as `N/A`); zeros are kept as present values.
/// Throws ParseError naming the offending data row.
LoadSeries parse_load_csv(std::string_view bytes, const std::string& country,
                          SourceKind source = SourceKind::total_load);

/// Renders a series in the same CSV format parse_load_csv() reads.
std::string write_load_csv(const LoadSeries& series);

/// Modal interval length mapped onto the supported frequencies.
/// Throws InvalidInput with fewer than two observations and
/// UnsupportedFrequency when the mode is not 15, 30 or 60 minutes.
Frequency detect_frequency(const LoadSeries& series);

/// Averages sub-hourly readings per UTC clock hour. An hour whose readings
/// are incomplete (absent value or missing row) yields an absent value.
LoadSeries aggregate_to_hourly(const LoadSeries& series);

/// Default hour from which total-load actuals replace vertical-load actuals.
Timestamp default_vertical_cutoff();

/// Joins hourly total and vertical series. Hours at or after `cutoff` take
/// actuals from `total`; earlier hours take them from `vertical` whenever it
/// has a row for that hour, otherwise from `total`. Forecast values always
/// come from `total`. Throws InvalidInput on country mismatch.
LoadSeries merge_load_sources(const LoadSeries& total, const LoadSeries& vertical, Timestamp cutoff);

/// Inserts or replaces observations keyed by interval_start.
/// Throws InvalidInput when frequencies or countries differ.
LoadSeries upsert(const LoadSeries& base, const LoadSeries& update);

nlohmann::json to_json(const LoadSeries& series);
LoadSeries series_from_json(const nlohmann::json& doc);

} // namespace loadcast
