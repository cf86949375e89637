#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/ingestion.hpp"

namespace loadcast {

/// Half-open interval [start, end).
struct Period {
    Timestamp start;
    Timestamp end;
};

struct QualityReport {
    std::string country;
    Period period;
    Frequency frequency = Frequency::hourly;
    std::int64_t expected_slots = 0;
    std::int64_t target_na = 0;
    std::int64_t target_zero = 0;
    std::int64_t forecast_na = 0;
    std::int64_t forecast_zero = 0;

    double target_na_pct() const { return pct(target_na); }
    double target_zero_pct() const { return pct(target_zero); }
    double forecast_na_pct() const { return pct(forecast_na); }
    double forecast_zero_pct() const { return pct(forecast_zero); }

    std::int64_t bad_cells() const { return target_na + target_zero + forecast_na + forecast_zero; }

    /// 100 * (1 - bad_cells / (2 * expected_slots)).
    double overall_score() const;

private:
    double pct(std::int64_t count) const;
};

/// Counts N/A and zero cells of both value columns against the number of
/// intervals the period could hold. Slots with no row count as N/A in both
/// columns. Throws InvalidInput for an empty period.
QualityReport audit(const LoadSeries& series, const Period& period);

/// Pools the counts of reports over adjacent periods of the same series.
QualityReport combine(const QualityReport& first, const QualityReport& second);

/// `fraction` 0.982 with one decimal gives "98.2%".
std::string format_percent(double fraction, int decimals);

/// Human readable country name for an EIC area code, or the code itself.
std::string country_name(const std::string& code);
/// Two-letter label used in result tables ("CZ"), or the code itself.
std::string country_label(const std::string& code);
/// IANA zone conventionally used for an EIC area code, empty if unknown.
std::string country_zone(const std::string& code);

/// Score table followed by the per-column issue table, rows ordered by
/// country name.
std::string render_report(std::vector<QualityReport> reports);

nlohmann::json to_json(const QualityReport& report);

} // namespace loadcast
