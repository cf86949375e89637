#include "loadcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "loadcast/errors.hpp"
#include "loadcast/stats.hpp"

namespace loadcast {

namespace {

std::string fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    // Avoid "-0.000" for values that round to zero.
    std::string s = buf;
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, 1);
    }
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.insert(0, width - s.size(), ' ');
    }
    return s;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

nlohmann::json stats_json(const ErrorStats& s) {
    return {{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"p25", s.p25},
            {"p50", s.p50},     {"p75", s.p75},   {"max", s.max}};
}

nlohmann::json histogram_json(const std::vector<HistogramBin>& bins) {
    auto out = nlohmann::json::array();
    for (const auto& b : bins) {
        out.push_back({{"bin", b.lower}, {"count", b.count}});
    }
    return out;
}

} // namespace

double mape(std::span<const double> forecasts, std::span<const double> actuals) {
    if (forecasts.size() != actuals.size()) {
        throw InvalidInput("forecasts and actuals differ in length");
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i] == 0.0 || !std::isfinite(actuals[i]) || !std::isfinite(forecasts[i])) {
            continue;
        }
        acc += std::abs(forecasts[i] - actuals[i]) / std::abs(actuals[i]);
        ++n;
    }
    if (n == 0) {
        throw InvalidInput("MAPE needs at least one pair with a non-zero actual");
    }
    return 100.0 * acc / static_cast<double>(n);
}

double pinball_loss(int alpha, double q, double y) {
    if (alpha < 1 || alpha > 99) {
        throw InvalidInput("pinball percentile must be in 1..99, got " + std::to_string(alpha));
    }
    if (!std::isfinite(q) || !std::isfinite(y)) {
        throw InvalidInput("pinball inputs must be finite");
    }
    const double tau = alpha / 100.0;
    return y < q ? (1.0 - tau) * (q - y) : tau * (y - q);
}

double pinball(const std::map<int, double>& quantile_forecasts, double actual) {
    if (quantile_forecasts.empty()) {
        throw InvalidInput("pinball needs at least one quantile forecast");
    }
    double acc = 0.0;
    for (const auto& [a, q] : quantile_forecasts) {
        acc += pinball_loss(a, q, actual);
    }
    return acc / static_cast<double>(quantile_forecasts.size());
}

PinballSummary pinball_batch(const std::vector<std::map<int, double>>& forecasts, std::span<const double> actuals) {
    if (forecasts.size() != actuals.size() || forecasts.empty()) {
        throw InvalidInput("pinball batch needs aligned, non-empty forecasts and actuals");
    }
    PinballSummary out;
    std::map<int, std::size_t> counts;
    double total = 0.0;
    std::size_t terms = 0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        for (const auto& [a, q] : forecasts[i]) {
            const double l = pinball_loss(a, q, actuals[i]);
            out.per_quantile[a] += l;
            ++counts[a];
            total += l;
            ++terms;
        }
    }
    if (terms == 0) {
        throw InvalidInput("pinball batch carries no quantile forecasts");
    }
    for (auto& [a, sum] : out.per_quantile) {
        sum /= static_cast<double>(counts[a]);
    }
    out.average = total / static_cast<double>(terms);
    return out;
}

ErrorStats error_stats(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInput("error statistics need at least one value");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    ErrorStats s;
    s.count = sorted.size();
    s.mean = stats::mean(sorted);
    s.std = stats::stddev(sorted);
    s.min = sorted.front();
    s.p25 = stats::percentile_sorted(sorted, 25);
    s.p50 = stats::percentile_sorted(sorted, 50);
    s.p75 = stats::percentile_sorted(sorted, 75);
    s.max = sorted.back();
    return s;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double width, double limit) {
    if (!(width > 0.0) || !(limit > 0.0)) {
        throw InvalidInput("histogram width and limit must be positive");
    }
    const auto bins = static_cast<std::size_t>(std::ceil(limit / width));
    std::vector<HistogramBin> out(bins + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].lower = static_cast<double>(i) * width;
    }
    for (double v : values) {
        const auto i = v < 0.0 ? 0 : std::min(bins, static_cast<std::size_t>(std::floor(v / width)));
        ++out[i].count;
    }
    return out;
}

Actuals actuals_from(const LoadSeries& hourly) {
    Actuals out;
    for (const auto& o : hourly.observations) {
        if (o.actual_load) {
            out.emplace(o.interval_start, *o.actual_load);
        }
    }
    return out;
}

// ------------------------------------------------------------ horizon table

HorizonTable horizon_table(std::span<const ForecastRecord> records,
                           const std::map<std::string, Actuals>& actuals_by_country) {
    std::map<int, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> pairs;
    std::set<std::string> countries;
    for (const auto& r : records) {
        const auto c = actuals_by_country.find(r.country);
        if (c == actuals_by_country.end()) {
            continue;
        }
        const auto a = c->second.find(r.target_time);
        if (a == c->second.end() || a->second == 0.0) {
            continue;
        }
        auto& [f, y] = pairs[r.horizon][r.country];
        f.push_back(r.point);
        y.push_back(a->second);
        countries.insert(r.country);
    }
    HorizonTable table;
    table.countries.assign(countries.begin(), countries.end());
    for (const auto& [h, by_country] : pairs) {
        for (const auto& [country, fy] : by_country) {
            table.cells[h][country] = mape(fy.first, fy.second);
        }
    }
    return table;
}

std::string HorizonTable::render() const {
    std::string out = pad_right("h", 4);
    for (const auto& c : countries) {
        out += pad_left(country_label(c), 8);
    }
    out += '\n';
    for (const auto& [h, row] : cells) {
        out += pad_right(std::to_string(h), 4);
        for (const auto& c : countries) {
            const auto it = row.find(c);
            out += pad_left(it == row.end() ? "-" : fixed(it->second, 2), 8);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json HorizonTable::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& [h, row] : cells) {
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [c, v] : row) {
            values[c] = v;
        }
        rows.push_back({{"horizon", h}, {"mape", std::move(values)}});
    }
    return {{"countries", countries}, {"rows", std::move(rows)}};
}

// ----------------------------------------------------------- month tables

std::string month_name(int month) {
    static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    if (month < 1 || month > 12) {
        throw InvalidInput("month must be in 1..12");
    }
    return names[month - 1];
}

std::string month_key(Timestamp t) {
    const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(t)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
    return buf;
}

std::optional<double> MonthTable::get(const std::string& country, int month) const {
    const auto c = cells.find(country);
    if (c == cells.end()) {
        return std::nullopt;
    }
    const auto m = c->second.find(month);
    return m == c->second.end() ? std::nullopt : m->second;
}

std::vector<int> MonthTable::months() const {
    std::set<int> months;
    for (const auto& [_, row] : cells) {
        for (const auto& [m, __] : row) {
            months.insert(m);
        }
    }
    return {months.begin(), months.end()};
}

std::optional<double> ComparisonCell::delta() const {
    if (!available()) {
        return std::nullopt;
    }
    return *model - *benchmark;
}

ComparisonReport benchmark_compare(const MonthTable& model, const MonthTable& benchmark) {
    std::set<std::string> countries;
    for (const auto* t : {&model, &benchmark}) {
        for (const auto& [c, _] : t->cells) {
            countries.insert(c);
        }
    }
    std::set<int> months;
    for (const auto* t : {&model, &benchmark}) {
        for (int m : t->months()) {
            months.insert(m);
        }
    }
    ComparisonReport report;
    for (const auto& c : countries) {
        for (int m : months) {
            report.cells.push_back({c, m, model.get(c, m), benchmark.get(c, m)});
        }
    }
    return report;
}

const ComparisonCell* ComparisonReport::find(const std::string& country, int month) const {
    for (const auto& c : cells) {
        if (c.country == country && c.month == month) {
            return &c;
        }
    }
    return nullptr;
}

std::vector<ComparisonCell> ComparisonReport::unavailable() const {
    std::vector<ComparisonCell> out;
    std::copy_if(cells.begin(), cells.end(), std::back_inserter(out),
                 [](const ComparisonCell& c) { return !c.available(); });
    return out;
}

std::string ComparisonReport::render() const {
    std::string out = pad_right("Country", 18) + pad_right("Month", 6) + pad_left("Model", 10) +
                      pad_left("Benchmark", 11) + pad_left("Delta", 10) + "  Result\n";
    for (const auto& c : cells) {
        out += pad_right(c.country, 18) + pad_right(month_name(c.month), 6);
        out += pad_left(c.model ? fixed(*c.model, 3) : "-", 10);
        out += pad_left(c.benchmark ? fixed(*c.benchmark, 3) : "-", 11);
        if (const auto d = c.delta()) {
            const auto text = fixed(*d, 3);
            const char* verdict = text == "0.000" ? "tie" : (*d < 0.0 ? "model" : "benchmark");
            out += pad_left(text, 10) + "  " + verdict + "\n";
        } else {
            out += pad_left("-", 10) + "  unavailable\n";
        }
    }
    return out;
}

nlohmann::json ComparisonReport::to_json() const {
    auto rows = nlohmann::json::array();
    for (const auto& c : cells) {
        const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
        rows.push_back({{"country", c.country},
                        {"month", month_name(c.month)},
                        {"model", opt(c.model)},
                        {"benchmark", opt(c.benchmark)},
                        {"delta", opt(c.delta())},
                        {"available", c.available()}});
    }
    return rows;
}

// ---------------------------------------------------------------- backtest

EvaluationResult evaluate(const std::string& country, std::span<const ForecastRecord> records,
                          const LoadSeries& hourly, const Period& period, std::optional<int> horizon) {
    if (!(period.start < period.end)) {
        throw InvalidInput("evaluation period must have start < end");
    }
    if (horizon && (*horizon < 1 || *horizon > kMaxHorizon)) {
        throw InvalidInput("horizon must be in 1.." + std::to_string(kMaxHorizon));
    }
    std::map<Timestamp, const LoadObservation*> by_hour;
    for (const auto& o : hourly.observations) {
        by_hour[o.interval_start] = &o;
    }
    const auto in_period = [&](Timestamp t) { return !(t < period.start) && t < period.end; };

    EvaluationResult result;
    result.country = country;
    result.period = period;
    result.horizon = horizon;

    std::vector<double> f;
    std::vector<double> y;
    std::vector<double> ape;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> monthly;
    std::vector<std::map<int, double>> quantiles;
    std::vector<double> quantile_actuals;
    std::vector<ForecastRecord> scored;
    for (const auto& r : records) {
        if (r.country != country || !in_period(r.target_time) || (horizon && r.horizon != *horizon)) {
            continue;
        }
        const auto it = by_hour.find(r.target_time);
        if (it == by_hour.end() || !it->second->actual_load || *it->second->actual_load == 0.0) {
            continue;
        }
        const double actual = *it->second->actual_load;
        f.push_back(r.point);
        y.push_back(actual);
        ape.push_back(100.0 * std::abs(r.point - actual) / actual);
        auto& [mf, my] = monthly[month_key(r.target_time)];
        mf.push_back(r.point);
        my.push_back(actual);
        if (r.deciles) {
            std::map<int, double> q;
            for (std::size_t i = 0; i < r.deciles->size(); ++i) {
                q[kDeciles[i]] = (*r.deciles)[i];
            }
            quantiles.push_back(std::move(q));
            quantile_actuals.push_back(actual);
        }
        scored.push_back(r);
    }
    if (f.empty()) {
        throw InsufficientData("no forecast for " + country + " in the period has a usable actual", records.size(), 0);
    }
    result.pairs = f.size();
    result.mape = mape(f, y);
    for (const auto& [key, fy] : monthly) {
        result.monthly_mape[key] = mape(fy.first, fy.second);
    }
    result.stats = error_stats(ape);
    result.error_histogram = histogram(ape);
    if (!quantiles.empty()) {
        result.pinball = pinball_batch(quantiles, quantile_actuals);
    }

    std::vector<double> bf;
    std::vector<double> by;
    std::vector<double> bape;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> bench_monthly;
    for (const auto& [t, o] : by_hour) {
        if (!in_period(t) || !o->actual_load || !o->day_ahead_forecast || *o->actual_load == 0.0) {
            continue;
        }
        bf.push_back(*o->day_ahead_forecast);
        by.push_back(*o->actual_load);
        bape.push_back(100.0 * std::abs(*o->day_ahead_forecast - *o->actual_load) / *o->actual_load);
        auto& [mf, my] = bench_monthly[month_key(t)];
        mf.push_back(*o->day_ahead_forecast);
        my.push_back(*o->actual_load);
    }
    if (!bf.empty()) {
        result.benchmark_mape = mape(bf, by);
        result.benchmark_histogram = histogram(bape);
        for (const auto& [key, fy] : bench_monthly) {
            result.benchmark_monthly_mape[key] = mape(fy.first, fy.second);
        }
    }
    result.horizons = horizon_table(scored, {{country, actuals_from(hourly)}});
    return result;
}

nlohmann::json EvaluationResult::to_json() const {
    nlohmann::json doc{{"country", country},
                       {"period_start", format_timestamp(period.start)},
                       {"period_end", format_timestamp(period.end)},
                       {"horizon", horizon ? nlohmann::json(*horizon) : nlohmann::json(nullptr)},
                       {"pairs", pairs},
                       {"mape", mape},
                       {"monthly_mape", monthly_mape},
                       {"error_stats", stats_json(stats)},
                       {"error_histogram", histogram_json(error_histogram)},
                       {"benchmark_mape", benchmark_mape ? nlohmann::json(*benchmark_mape) : nlohmann::json(nullptr)},
                       {"benchmark_monthly_mape", benchmark_monthly_mape},
                       {"benchmark_histogram", histogram_json(benchmark_histogram)},
                       {"horizon_table", horizons.to_json()}};
    if (pinball) {
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [a, v] : pinball->per_quantile) {
            per[std::to_string(a)] = v;
        }
        doc["pinball"] = {{"average", pinball->average}, {"per_quantile", std::move(per)}};
    } else {
        doc["pinball"] = nullptr;
    }
    return doc;
}

std::string EvaluationResult::render() const {
    std::string out;
    out += "Country " + country + " (" + format_timestamp(period.start) + " .. " + format_timestamp(period.end) + ")\n";
    out += "MAPE " + fixed(mape, 3) + " over " + std::to_string(pairs) + " forecasts";
    if (benchmark_mape) {
        out += ", benchmark " + fixed(*benchmark_mape, 3);
    }
    out += "\n\n";

    out += pad_right("Month", 9) + pad_left("Model", 10) + pad_left("Benchmark", 11) + "\n";
    std::set<std::string> keys;
    for (const auto& [k, _] : monthly_mape) {
        keys.insert(k);
    }
    for (const auto& [k, _] : benchmark_monthly_mape) {
        keys.insert(k);
    }
    for (const auto& k : keys) {
        const auto m = monthly_mape.find(k);
        const auto b = benchmark_monthly_mape.find(k);
        out += pad_right(k, 9) + pad_left(m == monthly_mape.end() ? "-" : fixed(m->second, 3), 10) +
               pad_left(b == benchmark_monthly_mape.end() ? "-" : fixed(b->second, 3), 11) + "\n";
    }
    out += "\n";
    out += pad_left("mean", 8) + pad_left("std", 8) + pad_left("min", 8) + pad_left("25%", 8) + pad_left("50%", 8) +
           pad_left("75%", 8) + pad_left("max", 9) + "\n";
    out += pad_left(fixed(stats.mean, 3), 8) + pad_left(fixed(stats.std, 3), 8) + pad_left(fixed(stats.min, 3), 8) +
           pad_left(fixed(stats.p25, 3), 8) + pad_left(fixed(stats.p50, 3), 8) + pad_left(fixed(stats.p75, 3), 8) +
           pad_left(fixed(stats.max, 3), 9) + "\n\n";
    out += horizons.render();
    if (pinball) {
        out += "\nPinball loss " + fixed(pinball->average, 3) + " (deciles";
        for (const auto& [a, _] : pinball->per_quantile) {
            out += " " + std::to_string(a);
        }
        out += ")\n";
    }
    return out;
}

} // namespace loadcast
