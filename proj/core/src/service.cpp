#include "loadcast/service.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace loadcast {

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::not_found:
        return 404;
    case ErrorCode::invalid_input:
        return 400;
    case ErrorCode::insufficient_data:
        return 422;
    case ErrorCode::internal:
        return 500;
    }
    return 500;
}

nlohmann::json error_document(ErrorCode code, const std::string& message, const nlohmann::json& detail) {
    return {{"error", {{"code", to_string(code)}, {"message", message}, {"detail", detail}}}};
}

Api::Api(Engine& engine) : engine_(engine) {}

std::mutex& Api::ingest_lock(const std::string& country) {
    std::lock_guard guard(locks_guard_);
    auto& slot = ingest_locks_[country];
    if (!slot) {
        slot = std::make_unique<std::mutex>();
    }
    return *slot;
}

void Api::require_series(const std::string& country) const {
    check_country_code(country);
    if (!engine_.store().try_load_series(country)) {
        throw NotFound("unknown country " + country);
    }
}

nlohmann::json Api::countries() const {
    auto out = nlohmann::json::array();
    for (const auto& code : engine_.store().series_countries()) {
        const auto series = engine_.store().try_load_series(code);
        if (!series) {
            continue;
        }
        nlohmann::json entry{{"country", code}, {"name", country_name(code)}};
        if (series->empty()) {
            entry["span_start"] = nullptr;
            entry["span_end"] = nullptr;
        } else {
            entry["span_start"] = format_timestamp(series->observations.front().interval_start);
            entry["span_end"] = format_timestamp(series->observations.back().interval_end);
        }
        entry["frequency"] = to_string(series->frequency);
        const auto trained = engine_.store().latest_model_time(code);
        entry["latest_model_trained_at"] = trained ? nlohmann::json(format_timestamp(*trained)) : nlohmann::json(nullptr);
        out.push_back(std::move(entry));
    }
    return out;
}

nlohmann::json Api::forecast(const std::string& country, std::optional<Timestamp> from, int hours) const {
    if (hours < 1 || hours > kMaxHorizon) {
        throw InvalidInput("hours must be in 1..24");
    }
    require_series(country);
    const auto docs = engine_.store().forecast_batches(country);
    std::vector<ForecastBatch> batches;
    batches.reserve(docs.size());
    for (const auto& d : docs) {
        batches.push_back(forecast_batch_from_json(d));
    }
    if (batches.empty()) {
        throw InsufficientData("no forecasts issued for " + country + " yet", 0, 0);
    }
    // Latest issue wins; among equal issue times the later append wins.
    std::stable_sort(batches.begin(), batches.end(),
                     [](const ForecastBatch& a, const ForecastBatch& b) { return a.issued_at < b.issued_at; });
    const auto start = from ? floor_hour(*from) : floor_hour(batches.back().issued_at) + kHour;

    auto records = nlohmann::json::array();
    for (int i = 0; i < hours; ++i) {
        const auto target = start + std::chrono::hours{i};
        for (auto b = batches.rbegin(); b != batches.rend(); ++b) {
            const auto r = std::find_if(b->records.begin(), b->records.end(),
                                        [&](const ForecastRecord& rec) { return rec.target_time == target; });
            if (r != b->records.end()) {
                records.push_back(to_json(*r));
                break;
            }
        }
    }
    if (records.empty()) {
        throw InsufficientData("no forecasts for " + country + " cover the requested window", batches.size(), 0);
    }
    return {{"country", country}, {"from", format_timestamp(start)}, {"hours", hours}, {"records", std::move(records)}};
}

nlohmann::json Api::issue_forecast(const std::string& country, Timestamp now) {
    require_series(country);
    const auto batch = engine_.issue_forecasts(country, now);
    if (batch.records.empty()) {
        throw InsufficientData("no horizon could be forecast for " + country, kMaxHorizon, 0);
    }
    return to_json(batch);
}

nlohmann::json Api::ingest(const std::string& country, std::string_view csv, SourceKind source) {
    check_country_code(country);
    auto parsed = parse_load_csv(csv, country, source);
    if (parsed.empty()) {
        throw InvalidInput("upload contains no data rows");
    }
    std::lock_guard guard(ingest_lock(country));
    const auto existing = engine_.store().try_load_series(country, source);
    const auto merged = existing ? upsert(*existing, parsed) : parsed;
    const bool stored = engine_.store().store_series(merged);
    const auto frequency = parsed.size() >= 2 ? detect_frequency(parsed) : parsed.frequency;
    return {{"country", country},
            {"source", to_string(source)},
            {"rows", parsed.size()},
            {"frequency", to_string(frequency)},
            {"period",
             {{"start", format_timestamp(parsed.observations.front().interval_start)},
              {"end", format_timestamp(parsed.observations.back().interval_end)}}},
            {"stored_rows", merged.size()},
            {"changed", stored}};
}

nlohmann::json Api::rebuild(const std::string& country, Timestamp now, std::optional<bool> deciles) {
    require_series(country);
    const auto result = engine_.rebuild_models(country, now, deciles);
    return {{"country", country},
            {"trained_at", format_timestamp(result.trained_at)},
            {"basic", result.count(ModelKind::basic)},
            {"advanced", result.count(ModelKind::advanced)},
            {"decile", result.count(ModelKind::advanced, true)},
            {"warnings", result.warnings}};
}

std::vector<QualityReport> Api::quality_reports(const Period& period) const {
    if (!(period.start < period.end)) {
        throw InvalidInput("quality period must have from < to");
    }
    std::vector<QualityReport> reports;
    for (const auto& code : engine_.store().series_countries()) {
        if (const auto series = engine_.store().try_load_series(code)) {
            reports.push_back(audit(*series, period));
        }
    }
    std::stable_sort(reports.begin(), reports.end(), [](const QualityReport& a, const QualityReport& b) {
        return std::make_pair(country_name(a.country), a.country) < std::make_pair(country_name(b.country), b.country);
    });
    return reports;
}

nlohmann::json Api::quality(const Period& period) const {
    auto out = nlohmann::json::array();
    for (const auto& r : quality_reports(period)) {
        out.push_back(to_json(r));
    }
    return out;
}

EvaluationResult Api::evaluation(const std::string& country, const Period& period, std::optional<int> horizon) const {
    require_series(country);
    std::vector<ForecastRecord> records;
    for (const auto& d : engine_.store().forecast_batches(country)) {
        auto batch = forecast_batch_from_json(d);
        records.insert(records.end(), batch.records.begin(), batch.records.end());
    }
    return loadcast::evaluate(country, records, engine_.prepared_series(country), period, horizon);
}

nlohmann::json Api::evaluate(const std::string& country, const Period& period, std::optional<int> horizon) const {
    return evaluation(country, period, horizon).to_json();
}

ApiResponse Api::respond(const std::function<nlohmann::json()>& handler) {
    try {
        return {200, handler()};
    } catch (const InsufficientData& e) {
        return {http_status(e.code()),
                error_document(e.code(), e.what(), {{"candidates", e.candidates()}, {"kept", e.kept()}})};
    } catch (const ParseError& e) {
        return {http_status(e.code()), error_document(e.code(), e.what(), {{"row", e.row()}})};
    } catch (const Error& e) {
        return {http_status(e.code()), error_document(e.code(), e.what())};
    } catch (const std::exception& e) {
        spdlog::error("unhandled: {}", e.what());
        return {500, error_document(ErrorCode::internal, e.what())};
    }
}

} // namespace loadcast
