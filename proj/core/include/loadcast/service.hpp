#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "loadcast/engine.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/evaluation.hpp"
#include "loadcast/quality.hpp"

namespace loadcast {

/// not_found 404, invalid_input 400, insufficient_data 422, internal 500.
int http_status(ErrorCode code);

/// `{"error": {"code": ..., "message": ..., "detail": ...}}`
nlohmann::json error_document(ErrorCode code, const std::string& message,
                              const nlohmann::json& detail = nullptr);

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Transport-independent handlers behind the HTTP routes and the CLI.
/// Each method returns the response payload or throws loadcast::Error.
class Api {
public:
    explicit Api(Engine& engine);

    /// GET /countries
    nlohmann::json countries() const;

    /// GET /forecast/{country}?from=&hours=
    nlohmann::json forecast(const std::string& country, std::optional<Timestamp> from, int hours = 24) const;

    /// POST /forecast/{country}?now=  (issues and persists a batch)
    nlohmann::json issue_forecast(const std::string& country, Timestamp now);

    /// POST /data/{country}?source=
    nlohmann::json ingest(const std::string& country, std::string_view csv,
                          SourceKind source = SourceKind::total_load);

    /// POST /models/{country}/rebuild?deciles=
    nlohmann::json rebuild(const std::string& country, Timestamp now, std::optional<bool> deciles = {});

    /// GET /quality?from=&to=
    nlohmann::json quality(const Period& period) const;
    std::vector<QualityReport> quality_reports(const Period& period) const;

    /// GET /evaluate/{country}?from=&to=&horizon=
    nlohmann::json evaluate(const std::string& country, const Period& period, std::optional<int> horizon = {}) const;
    EvaluationResult evaluation(const std::string& country, const Period& period,
                                std::optional<int> horizon = {}) const;

    Engine& engine() noexcept { return engine_; }

    /// Runs `handler`, mapping loadcast::Error and other exceptions onto a
    /// status code and error document.
    static ApiResponse respond(const std::function<nlohmann::json()>& handler);

private:
    void require_series(const std::string& country) const;
    std::mutex& ingest_lock(const std::string& country);

    Engine& engine_;
    std::mutex locks_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> ingest_locks_;
};

} // namespace loadcast
