#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/features.hpp"
#include "loadcast/gbrt.hpp"
#include "loadcast/model_record.hpp"
#include "loadcast/store.hpp"

namespace loadcast {

inline constexpr int kMaxHorizon = 24;

struct EngineConfig {
    std::filesystem::path data_dir = "data";
    /// Holiday files named `<country>.txt`; defaults to `<data_dir>/calendars`.
    std::filesystem::path calendar_dir;
    /// Countries handled by the scheduler; empty means every stored series.
    std::vector<std::string> countries;
    /// Time zone overrides keyed by country code.
    std::map<std::string, std::string> zones;

    /// Local time of the daily rebuild in each country's zone.
    int rebuild_hour = 0;
    int rebuild_minute = 0;

    bool deciles = false;
    gbrt::BoostConfig basic{50, 0.1, 5, 5, gbrt::Loss::squared()};
    gbrt::BoostConfig advanced{100, 0.1, 7, 5, gbrt::Loss::squared()};
    /// Shared by the nine decile models; the loss field is ignored.
    gbrt::BoostConfig decile{100, 0.1, 3, 50, gbrt::Loss::squared()};

    Timestamp vertical_cutoff = default_vertical_cutoff();

    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;

    /// Worker threads for training; 0 picks the hardware concurrency.
    unsigned threads = 0;

    /// Throws ConfigurationError.
    void validate() const;
};

/// Reads the JSON configuration document. Missing keys keep their defaults.
EngineConfig engine_config_from_json(const nlohmann::json& doc);
EngineConfig load_engine_config(const std::filesystem::path& file);
nlohmann::json to_json(const EngineConfig& config);

struct ForecastRecord {
    std::string country;
    Timestamp issued_at;
    Timestamp target_time;
    int horizon = 1;
    ModelKind kind = ModelKind::basic;
    double point = 0.0;
    /// q10..q90, non-decreasing.
    std::optional<std::array<double, 9>> deciles;
};

struct HorizonError {
    int horizon = 0;
    std::string message;
};

/// Outcome of one forecast run: a record or an error for every horizon.
struct ForecastBatch {
    std::string country;
    Timestamp issued_at;
    std::vector<ForecastRecord> records;
    std::vector<HorizonError> errors;
};

nlohmann::json to_json(const ForecastRecord& record);
ForecastRecord forecast_record_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ForecastBatch& batch);
ForecastBatch forecast_batch_from_json(const nlohmann::json& doc);

/// Sorts crossed decile predictions into ascending order.
std::array<double, 9> repair_decile_crossing(std::array<double, 9> deciles);

struct RebuildResult {
    std::string country;
    Timestamp trained_at;
    std::vector<ModelRecord> records;
    std::vector<std::string> warnings;

    std::size_t count(ModelKind kind, bool deciles = false) const;
};

/// Latest model per (horizon, kind, loss) for one country.
class ModelSnapshot {
public:
    void put(std::shared_ptr<const ModelRecord> record);
    const ModelRecord* find(int horizon, ModelKind kind, const LossTag& loss = LossTag::point()) const;
    bool empty() const noexcept { return records_.empty(); }
    std::size_t size() const noexcept { return records_.size(); }

private:
    std::map<std::string, std::shared_ptr<const ModelRecord>> records_;
};

/// Per-country training and forecasting on top of a DocumentStore.
///
/// Rebuilds train outside any lock, persist under the country's writer lock
/// and then publish a new ModelSnapshot. A forecast batch grabs one snapshot
/// up front, so its 24 horizons never mix model generations.
class Engine {
public:
    explicit Engine(EngineConfig config);
    Engine(EngineConfig config, std::shared_ptr<DocumentStore> store);

    const EngineConfig& config() const noexcept { return config_; }
    DocumentStore& store() noexcept { return *store_; }
    const DocumentStore& store() const noexcept { return *store_; }

    /// Zone from the config override or the built-in area table; holidays
    /// from `<calendar_dir>/<country>.txt` when that file exists.
    Calendar calendar_for(const std::string& country) const;

    /// Stored total (and optional vertical) load, aggregated to hourly and merged.
    LoadSeries prepared_series(const std::string& country) const;

    /// Trains and persists basic, advanced and (optionally) decile models for
    /// horizons 1..24 with trained_at = `now`. Throws NotFound for an unknown
    /// country and InsufficientData when not even basic models can be built.
    /// `deciles` overrides the configured decile flag.
    RebuildResult rebuild_models(const std::string& country, Timestamp now, std::optional<bool> deciles = {});
    RebuildResult rebuild_models(const std::string& country, const LoadSeries& hourly, const Calendar& calendar,
                                 Timestamp now, std::optional<bool> deciles = {});

    /// Forecasts the 24 hours following `now` (truncated to the hour).
    ForecastBatch forecast_next_24(const std::string& country, Timestamp now);

    /// forecast_next_24() followed by persisting the batch.
    ForecastBatch issue_forecasts(const std::string& country, Timestamp now);

    /// Snapshot currently used for forecasting; loaded from the store on first use.
    std::shared_ptr<const ModelSnapshot> snapshot(const std::string& country);

    /// Drops the cached snapshot so the next forecast re-reads the store.
    void invalidate(const std::string& country);

    /// Countries the scheduler serves.
    std::vector<std::string> tracked_countries() const;

private:
    std::shared_mutex& country_lock(const std::string& country);
    std::shared_ptr<const ModelSnapshot> load_snapshot(const std::string& country);

    EngineConfig config_;
    std::shared_ptr<DocumentStore> store_;

    std::mutex state_guard_;
    std::map<std::string, std::shared_ptr<const ModelSnapshot>> snapshots_;
    std::map<std::string, std::unique_ptr<std::shared_mutex>> country_locks_;
};

/// Drives rebuilds at the configured local time and forecast batches at each
/// hour boundary. Time is supplied by the caller, which makes the schedule
/// testable with a simulated clock.
class Scheduler {
public:
    using Clock = std::function<Timestamp()>;

    struct Stats {
        std::size_t rebuilds = 0;
        std::size_t rebuild_failures = 0;
        std::size_t batches = 0;
        std::size_t forecast_failures = 0;
    };

    explicit Scheduler(Engine& engine);

    /// Fires every event due in (previous tick, now]. The first call only
    /// records the starting point. Failures are logged, counted and retried
    /// at the next scheduled time; they never propagate.
    void tick(Timestamp now);

    /// Service loop on `clock`, waking at each minute boundary until stopped.
    void run(std::stop_token stop, const Clock& clock);

    const Stats& stats() const noexcept { return stats_; }

    /// Called after each successful rebuild / forecast batch.
    std::function<void(const RebuildResult&)> on_rebuild;
    std::function<void(const ForecastBatch&)> on_batch;

private:
    bool is_rebuild_time(const std::string& country, Timestamp minute) const;

    Engine& engine_;
    std::optional<Timestamp> last_;
    Stats stats_;
    std::map<std::string, Calendar> calendars_;
};

} // namespace loadcast
