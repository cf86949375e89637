#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/engine.hpp"
#include "loadcast/quality.hpp"

namespace loadcast {

/// 100/n * sum |f - a| / |a| over pairs with a non-zero actual.
/// Throws InvalidInput on length mismatch or when no usable pair remains.
double mape(std::span<const double> forecasts, std::span<const double> actuals);

/// Pinball loss of quantile forecast `q` at percentile `alpha` (1..99).
double pinball_loss(int alpha, double q, double y);

/// Average pinball loss over the quantiles present in `quantile_forecasts`.
double pinball(const std::map<int, double>& quantile_forecasts, double actual);

struct PinballSummary {
    double average = 0.0;
    std::map<int, double> per_quantile;
};

/// Averages over quantiles and observations; `forecasts[i]` pairs with `actuals[i]`.
PinballSummary pinball_batch(const std::vector<std::map<int, double>>& forecasts, std::span<const double> actuals);

struct ErrorStats {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double max = 0.0;
};

/// Moments and quartiles; sample standard deviation. Throws on empty input.
ErrorStats error_stats(std::span<const double> abs_pct_errors);

struct HistogramBin {
    double lower = 0.0;
    std::size_t count = 0;
};

/// Fixed-width bins starting at 0; the last bin absorbs everything above `limit`.
std::vector<HistogramBin> histogram(std::span<const double> values, double width = 1.0, double limit = 50.0);

/// Actual loads keyed by UTC hour.
using Actuals = std::map<Timestamp, double>;

Actuals actuals_from(const LoadSeries& hourly);

/// MAPE by horizon (rows) and country (columns).
struct HorizonTable {
    std::vector<std::string> countries;
    std::map<int, std::map<std::string, double>> cells;

    std::string render() const;
    nlohmann::json to_json() const;
};

HorizonTable horizon_table(std::span<const ForecastRecord> records,
                           const std::map<std::string, Actuals>& actuals_by_country);

/// MAPE by country and calendar month (1..12); absent cells have no data.
struct MonthTable {
    std::map<std::string, std::map<int, std::optional<double>>> cells;

    void set(const std::string& country, int month, std::optional<double> value) { cells[country][month] = value; }
    std::optional<double> get(const std::string& country, int month) const;
    std::vector<int> months() const;
};

struct ComparisonCell {
    std::string country;
    int month = 0;
    std::optional<double> model;
    std::optional<double> benchmark;

    bool available() const { return model.has_value() && benchmark.has_value(); }
    /// model - benchmark; negative when the model is more accurate.
    std::optional<double> delta() const;
};

struct ComparisonReport {
    std::vector<ComparisonCell> cells;

    const ComparisonCell* find(const std::string& country, int month) const;
    std::vector<ComparisonCell> unavailable() const;
    /// Side-by-side text table; identical inputs render identical bytes.
    std::string render() const;
    nlohmann::json to_json() const;
};

ComparisonReport benchmark_compare(const MonthTable& model, const MonthTable& benchmark);

/// Three-letter month name, "Jan".."Dec".
std::string month_name(int month);

struct EvaluationResult {
    std::string country;
    Period period;
    std::optional<int> horizon;
    std::size_t pairs = 0;
    double mape = 0.0;
    std::map<std::string, double> monthly_mape; // "YYYY-MM"
    ErrorStats stats;
    std::optional<PinballSummary> pinball;
    std::optional<double> benchmark_mape;
    std::map<std::string, double> benchmark_monthly_mape;
    std::vector<HistogramBin> error_histogram;
    std::vector<HistogramBin> benchmark_histogram;
    HorizonTable horizons;

    nlohmann::json to_json() const;
    std::string render() const;
};

/// Back-tests forecast records against the actuals of `hourly`. Every record
/// whose target lies in `period` (and matches `horizon`, if given) is scored;
/// the series' day-ahead column is scored the same way as the benchmark.
/// Throws InvalidInput for an empty period or a horizon outside 1..24 and
/// InsufficientData when no record has a usable actual.
EvaluationResult evaluate(const std::string& country, std::span<const ForecastRecord> records,
                          const LoadSeries& hourly, const Period& period, std::optional<int> horizon = std::nullopt);

/// Month keys as "YYYY-MM" in UTC.
std::string month_key(Timestamp t);

} // namespace loadcast
