#include "loadcast/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "loadcast/errors.hpp"

namespace loadcast {

using std::chrono::minutes;

std::string_view to_string(Frequency f) {
    switch (f) {
    case Frequency::hourly:
        return "hourly";
    case Frequency::half_hourly:
        return "half-hourly";
    case Frequency::quarter_hourly:
        return "quarter-hourly";
    }
    return "hourly";
}

std::string_view display_name(Frequency f) {
    switch (f) {
    case Frequency::hourly:
        return "Hourly";
    case Frequency::half_hourly:
        return "Half-hourly";
    case Frequency::quarter_hourly:
        return "Quarter-hourly";
    }
    return "Hourly";
}

Frequency frequency_from_string(std::string_view text) {
    for (auto f : {Frequency::hourly, Frequency::half_hourly, Frequency::quarter_hourly}) {
        if (text == to_string(f)) {
            return f;
        }
    }
    throw InvalidInput("unknown frequency '" + std::string(text) + "'");
}

minutes interval_length(Frequency f) {
    switch (f) {
    case Frequency::hourly:
        return minutes{60};
    case Frequency::half_hourly:
        return minutes{30};
    case Frequency::quarter_hourly:
        return minutes{15};
    }
    return minutes{60};
}

Frequency frequency_for(minutes length) {
    if (length == minutes{60}) {
        return Frequency::hourly;
    }
    if (length == minutes{30}) {
        return Frequency::half_hourly;
    }
    if (length == minutes{15}) {
        return Frequency::quarter_hourly;
    }
    throw UnsupportedFrequency("unsupported interval length of " + std::to_string(length.count()) + " minutes");
}

std::string_view to_string(SourceKind s) {
    return s == SourceKind::total_load ? "total_load" : "vertical_load";
}

SourceKind source_from_string(std::string_view text) {
    if (text == "total_load" || text == "total") {
        return SourceKind::total_load;
    }
    if (text == "vertical_load" || text == "vertical") {
        return SourceKind::vertical_load;
    }
    throw InvalidInput("unknown load source '" + std::string(text) + "'");
}

void LoadSeries::validate() const {
    const auto expected = interval_length(frequency);
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (o.length() != expected) {
            throw InvalidInput("observation " + std::to_string(i) + " does not match the series frequency");
        }
        for (const auto& v : {o.day_ahead_forecast, o.actual_load}) {
            if (v && (!std::isfinite(*v) || *v < 0.0)) {
                throw InvalidInput("observation " + std::to_string(i) + " carries an invalid value");
            }
        }
        if (i > 0 && !(observations[i - 1].interval_start < o.interval_start)) {
            throw InvalidInput("observations are not strictly ordered");
        }
    }
}

// ---------------------------------------------------------------------- CSV

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<double> parse_value(std::string_view cell, std::size_t row, const char* column) {
    cell = trim(cell);
    if (cell.empty() || cell == "N/A") {
        return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(row, std::string("malformed ") + column + " value '" + std::string(cell) + "'");
    }
    if (v < 0.0) {
        throw ParseError(row, std::string("negative ") + column + " value");
    }
    return v;
}

std::string format_value(const std::optional<double>& v) {
    if (!v) {
        return "N/A";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, ptr);
}

} // namespace

LoadSeries parse_load_csv(std::string_view bytes, const std::string& country, SourceKind source) {
    if (bytes.starts_with("\xEF\xBB\xBF")) {
        bytes.remove_prefix(3);
    }
    auto lines = split(bytes, '\n');
    if (lines.empty() || trim(lines.front()) != kLoadCsvHeader) {
        throw ParseError(0, "expected header '" + std::string(kLoadCsvHeader) + "'");
    }

    struct Parsed {
        LoadObservation obs;
        std::size_t row;
    };
    std::vector<Parsed> parsed;
    std::optional<minutes> length;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i;
        const auto line = trim(lines[i]);
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 4) {
            throw ParseError(row, "expected 4 cells, found " + std::to_string(cells.size()));
        }
        LoadObservation o;
        try {
            o.interval_start = parse_timestamp(trim(cells[0]));
            o.interval_end = parse_timestamp(trim(cells[1]));
        } catch (const InvalidInput& e) {
            throw ParseError(row, e.what());
        }
        if (!(o.interval_end > o.interval_start)) {
            throw ParseError(row, "interval_end must be after interval_start");
        }
        const auto len = o.length();
        if (len != minutes{15} && len != minutes{30} && len != minutes{60}) {
            throw ParseError(row, "interval length of " + std::to_string(len.count()) +
                                      " minutes is not 15, 30 or 60");
        }
        if (length && *length != len) {
            throw ParseError(row, "mixed interval lengths (" + std::to_string(length->count()) + " and " +
                                      std::to_string(len.count()) + " minutes)");
        }
        length = len;
        o.day_ahead_forecast = parse_value(cells[2], row, "day_ahead_forecast");
        o.actual_load = parse_value(cells[3], row, "actual_load");
        parsed.push_back({o, row});
    }

    std::stable_sort(parsed.begin(), parsed.end(),
                     [](const Parsed& a, const Parsed& b) { return a.obs.interval_start < b.obs.interval_start; });
    LoadSeries series;
    series.country = country;
    series.source = source;
    series.frequency = length ? frequency_for(*length) : Frequency::hourly;
    series.observations.reserve(parsed.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        if (i > 0 && parsed[i].obs.interval_start == parsed[i - 1].obs.interval_start) {
            throw ParseError(std::max(parsed[i].row, parsed[i - 1].row), "duplicate interval " +
                                                                             format_timestamp(parsed[i].obs.interval_start));
        }
        series.observations.push_back(parsed[i].obs);
    }
    return series;
}

std::string write_load_csv(const LoadSeries& series) {
    std::string out(kLoadCsvHeader);
    out += '\n';
    for (const auto& o : series.observations) {
        out += format_timestamp(o.interval_start);
        out += ',';
        out += format_timestamp(o.interval_end);
        out += ',';
        out += format_value(o.day_ahead_forecast);
        out += ',';
        out += format_value(o.actual_load);
        out += '\n';
    }
    return out;
}

// -------------------------------------------------------------- frequency

Frequency detect_frequency(const LoadSeries& series) {
    if (series.observations.size() < 2) {
        throw InvalidInput("frequency detection needs at least two observations");
    }
    std::map<long, std::size_t> counts;
    for (const auto& o : series.observations) {
        ++counts[static_cast<long>(o.length().count())];
    }
    // Ties go to the shorter interval (map order).
    const auto mode = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    return frequency_for(minutes{mode->first});
}

LoadSeries aggregate_to_hourly(const LoadSeries& series) {
    if (series.frequency == Frequency::hourly) {
        return series;
    }
    const auto len = interval_length(series.frequency);
    const auto per_hour = static_cast<std::size_t>(60 / len.count());

    struct Bucket {
        std::size_t rows = 0;
        std::size_t forecast_present = 0;
        std::size_t actual_present = 0;
        double forecast_sum = 0.0;
        double actual_sum = 0.0;
    };
    std::map<Timestamp, Bucket> hours;
    for (const auto& o : series.observations) {
        auto& b = hours[floor_hour(o.interval_start)];
        ++b.rows;
        if (o.day_ahead_forecast) {
            ++b.forecast_present;
            b.forecast_sum += *o.day_ahead_forecast;
        }
        if (o.actual_load) {
            ++b.actual_present;
            b.actual_sum += *o.actual_load;
        }
    }

    LoadSeries out;
    out.country = series.country;
    out.source = series.source;
    out.frequency = Frequency::hourly;
    out.observations.reserve(hours.size());
    for (const auto& [hour, b] : hours) {
        LoadObservation o;
        o.interval_start = hour;
        o.interval_end = hour + kHour;
        const double n = static_cast<double>(per_hour);
        if (b.forecast_present == per_hour) {
            o.day_ahead_forecast = b.forecast_sum / n;
        }
        if (b.actual_present == per_hour) {
            o.actual_load = b.actual_sum / n;
        }
        out.observations.push_back(o);
    }
    return out;
}

// ------------------------------------------------------------------ merge

Timestamp default_vertical_cutoff() {
    return parse_timestamp("2015-01-01T00:00Z");
}

LoadSeries merge_load_sources(const LoadSeries& total, const LoadSeries& vertical, Timestamp cutoff) {
    if (!vertical.empty() && total.country != vertical.country) {
        throw InvalidInput("cannot merge series of different countries (" + total.country + ", " +
                           vertical.country + ")");
    }
    if (total.frequency != Frequency::hourly || vertical.frequency != Frequency::hourly) {
        throw InvalidInput("merge expects hourly series; aggregate first");
    }
    struct Slot {
        const LoadObservation* total = nullptr;
        const LoadObservation* vertical = nullptr;
    };
    std::map<Timestamp, Slot> slots;
    for (const auto& o : total.observations) {
        slots[o.interval_start].total = &o;
    }
    for (const auto& o : vertical.observations) {
        slots[o.interval_start].vertical = &o;
    }

    LoadSeries out;
    out.country = total.country.empty() ? vertical.country : total.country;
    out.frequency = Frequency::hourly;
    out.source = SourceKind::total_load;
    out.observations.reserve(slots.size());
    for (const auto& [hour, slot] : slots) {
        LoadObservation o;
        o.interval_start = hour;
        o.interval_end = hour + kHour;
        if (slot.total) {
            o.day_ahead_forecast = slot.total->day_ahead_forecast;
        }
        const bool use_vertical = hour < cutoff && slot.vertical != nullptr;
        const LoadObservation* source = use_vertical ? slot.vertical : slot.total;
        if (source) {
            o.actual_load = source->actual_load;
        }
        out.observations.push_back(o);
    }
    return out;
}

LoadSeries upsert(const LoadSeries& base, const LoadSeries& update) {
    if (base.empty()) {
        return update;
    }
    if (update.empty()) {
        return base;
    }
    if (base.country != update.country || base.source != update.source) {
        throw InvalidInput("cannot combine series of different country or source");
    }
    if (base.frequency != update.frequency) {
        throw InvalidInput("stored series is " + std::string(to_string(base.frequency)) + ", upload is " +
                           std::string(to_string(update.frequency)));
    }
    std::map<Timestamp, LoadObservation> merged;
    for (const auto& o : base.observations) {
        merged[o.interval_start] = o;
    }
    for (const auto& o : update.observations) {
        merged[o.interval_start] = o;
    }
    LoadSeries out = base;
    out.observations.clear();
    out.observations.reserve(merged.size());
    for (auto& [_, o] : merged) {
        out.observations.push_back(o);
    }
    return out;
}

// ----------------------------------------------------------------- JSON

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& v) {
    if (v.is_null()) {
        return std::nullopt;
    }
    return v.get<double>();
}

} // namespace

nlohmann::json to_json(const LoadSeries& series) {
    auto rows = nlohmann::json::array();
    for (const auto& o : series.observations) {
        rows.push_back({format_timestamp(o.interval_start), format_timestamp(o.interval_end),
                        optional_json(o.day_ahead_forecast), optional_json(o.actual_load)});
    }
    return {{"country", series.country},
            {"frequency", to_string(series.frequency)},
            {"source", to_string(series.source)},
            {"observations", std::move(rows)}};
}

LoadSeries series_from_json(const nlohmann::json& doc) {
    LoadSeries s;
    s.country = doc.at("country").get<std::string>();
    s.frequency = frequency_from_string(doc.at("frequency").get<std::string>());
    s.source = source_from_string(doc.at("source").get<std::string>());
    for (const auto& row : doc.at("observations")) {
        LoadObservation o;
        o.interval_start = parse_timestamp(row.at(0).get<std::string>());
        o.interval_end = parse_timestamp(row.at(1).get<std::string>());
        o.day_ahead_forecast = optional_from(row.at(2));
        o.actual_load = optional_from(row.at(3));
        s.observations.push_back(o);
    }
    return s;
}

} // namespace loadcast
