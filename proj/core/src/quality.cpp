#include "loadcast/quality.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

struct Area {
    const char* code;
    const char* name;
    const char* label;
    const char* zone;
};

// ENTSO-E bidding areas with their conventional names and local zones.
constexpr Area kAreas[] = {
    {"10YAL-KESH-----5", "Albania", "AL", "Europe/Tirane"},
    {"10YAT-APG------L", "Austria", "AT", "Europe/Vienna"},
    {"10YBE----------2", "Belgium", "BE", "Europe/Brussels"},
    {"10YCA-BULGARIA-R", "Bulgaria", "BG", "Europe/Sofia"},
    {"10YHR-HEP------M", "Croatia", "HR", "Europe/Zagreb"},
    {"10YCZ-CEPS-----N", "Czech Republic", "CZ", "Europe/Prague"},
    {"10Y1001A1001A65H", "Denmark", "DK", "Europe/Copenhagen"},
    {"10Y1001A1001A39I", "Estonia", "EE", "Europe/Tallinn"},
    {"10YFI-1--------U", "Finland", "FI", "Europe/Helsinki"},
    {"10YFR-RTE------C", "France", "FR", "Europe/Paris"},
    {"10Y1001A1001A83F", "Germany", "DE", "Europe/Berlin"},
    {"10YGR-HTSO-----Y", "Greece", "GR", "Europe/Athens"},
    {"10YHU-MAVIR----U", "Hungary", "HU", "Europe/Budapest"},
    {"10YIE-1001A00010", "Ireland", "IE", "Europe/Dublin"},
    {"10YIT-GRTN-----B", "Italy", "IT", "Europe/Rome"},
    {"10YLV-1001A00074", "Latvia", "LV", "Europe/Riga"},
    {"10YLT-1001A0008Q", "Lithuania", "LT", "Europe/Vilnius"},
    {"10YLU-CEGEDEL-NQ", "Luxembourg", "LU", "Europe/Luxembourg"},
    {"10YMK-MEPSO----8", "Macedonia", "MK", "Europe/Skopje"},
    {"10YCS-CG-TSO---S", "Montenegro", "ME", "Europe/Podgorica"},
    {"10YNL----------L", "Netherlands", "NL", "Europe/Amsterdam"},
    {"10YNO-0--------C", "Norway", "NO", "Europe/Oslo"},
    {"10YPL-AREA-----S", "Poland", "PL", "Europe/Warsaw"},
    {"10YPT-REN------W", "Portugal", "PT", "Europe/Lisbon"},
    {"10YRO-TEL------P", "Romania", "RO", "Europe/Bucharest"},
    {"10YCS-SERBIATSOV", "Serbia", "RS", "Europe/Belgrade"},
    {"10YSK-SEPS-----K", "Slovakia", "SK", "Europe/Bratislava"},
    {"10YSI-ELES-----O", "Slovenia", "SI", "Europe/Ljubljana"},
    {"10YES-REE------0", "Spain", "ES", "Europe/Madrid"},
    {"10YSE-1--------K", "Sweden", "SE", "Europe/Stockholm"},
    {"10YCH-SWISSGRIDZ", "Switzerland", "CH", "Europe/Zurich"},
    {"10YGB----------A", "United Kingdom", "GB", "Europe/London"},
};

const Area* find_area(const std::string& code) {
    for (const auto& a : kAreas) {
        if (code == a.code || code == a.label) {
            return &a;
        }
    }
    return nullptr;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.insert(0, width - s.size(), ' ');
    }
    return s;
}

} // namespace

std::string country_name(const std::string& code) {
    const auto* a = find_area(code);
    return a ? a->name : code;
}

std::string country_label(const std::string& code) {
    const auto* a = find_area(code);
    return a ? a->label : code;
}

std::string country_zone(const std::string& code) {
    const auto* a = find_area(code);
    return a ? a->zone : "";
}

double QualityReport::pct(std::int64_t count) const {
    return 100.0 * static_cast<double>(count) / static_cast<double>(expected_slots);
}

double QualityReport::overall_score() const {
    const auto cells = 2 * expected_slots;
    return 100.0 * static_cast<double>(cells - bad_cells()) / static_cast<double>(cells);
}

QualityReport audit(const LoadSeries& series, const Period& period) {
    if (!(period.start < period.end)) {
        throw InvalidInput("audit period must have start < end");
    }
    const auto step = std::chrono::duration_cast<std::chrono::seconds>(interval_length(series.frequency));
    const auto expected = (period.end - period.start) / step;
    if (expected <= 0) {
        throw InvalidInput("audit period is shorter than one reporting interval");
    }
    QualityReport r;
    r.country = series.country;
    r.period = period;
    r.frequency = series.frequency;
    r.expected_slots = expected;

    std::set<Timestamp> seen;
    for (const auto& o : series.observations) {
        if (o.interval_start < period.start || !(o.interval_start < period.start + expected * step)) {
            continue;
        }
        if (!seen.insert(o.interval_start).second) {
            continue;
        }
        if (!o.actual_load) {
            ++r.target_na;
        } else if (*o.actual_load == 0.0) {
            ++r.target_zero;
        }
        if (!o.day_ahead_forecast) {
            ++r.forecast_na;
        } else if (*o.day_ahead_forecast == 0.0) {
            ++r.forecast_zero;
        }
    }
    const auto missing = expected - static_cast<std::int64_t>(seen.size());
    r.target_na += missing;
    r.forecast_na += missing;
    return r;
}

QualityReport combine(const QualityReport& first, const QualityReport& second) {
    if (first.country != second.country || first.frequency != second.frequency) {
        throw InvalidInput("can only pool reports of one country and frequency");
    }
    QualityReport r = first;
    r.period = {std::min(first.period.start, second.period.start), std::max(first.period.end, second.period.end)};
    r.expected_slots += second.expected_slots;
    r.target_na += second.target_na;
    r.target_zero += second.target_zero;
    r.forecast_na += second.forecast_na;
    r.forecast_zero += second.forecast_zero;
    return r;
}

std::string format_percent(double fraction, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f%%", decimals, fraction * 100.0);
    return buf;
}

std::string render_report(std::vector<QualityReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const QualityReport& a, const QualityReport& b) {
        return std::make_pair(country_name(a.country), a.country) < std::make_pair(country_name(b.country), b.country);
    });

    std::string out;
    out += pad_right("Country code", 18) + pad_right("Country name", 16) + pad_left("Data quality", 12) + "  Frequency\n";
    for (const auto& r : reports) {
        out += pad_right(r.country, 18) + pad_right(country_name(r.country), 16) +
               pad_left(format_percent(r.overall_score() / 100.0, 1), 12) + "  " +
               std::string(display_name(r.frequency)) + "\n";
    }
    out += "\n";
    out += pad_right("Country", 16) + pad_left("Target is NA", 14) + pad_left("Target is 0", 13) +
           pad_left("Forecast is NA", 16) + pad_left("Forecast is 0", 15) + "\n";
    for (const auto& r : reports) {
        out += pad_right(country_name(r.country), 16) + pad_left(format_percent(r.target_na_pct() / 100.0, 2), 14) +
               pad_left(format_percent(r.target_zero_pct() / 100.0, 2), 13) +
               pad_left(format_percent(r.forecast_na_pct() / 100.0, 2), 16) +
               pad_left(format_percent(r.forecast_zero_pct() / 100.0, 2), 15) + "\n";
    }
    return out;
}

nlohmann::json to_json(const QualityReport& r) {
    return {{"country", r.country},
            {"country_name", country_name(r.country)},
            {"period_start", format_timestamp(r.period.start)},
            {"period_end", format_timestamp(r.period.end)},
            {"frequency", to_string(r.frequency)},
            {"expected_slots", r.expected_slots},
            {"target_na_pct", r.target_na_pct()},
            {"target_zero_pct", r.target_zero_pct()},
            {"forecast_na_pct", r.forecast_na_pct()},
            {"forecast_zero_pct", r.forecast_zero_pct()},
            {"overall_score", r.overall_score()}};
}

} // namespace loadcast
