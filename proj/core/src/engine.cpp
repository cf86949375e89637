#include "loadcast/engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "loadcast/errors.hpp"
#include "loadcast/quality.hpp"

namespace loadcast {

namespace {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_guard;
    std::exception_ptr error;
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_guard);
                        if (!error) {
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

gbrt::SampleSet to_samples(const std::vector<FeatureRow>& rows, const std::vector<double>& targets, ModelKind kind) {
    const auto& schema = feature_schema(kind);
    std::vector<double> flat;
    flat.reserve(rows.size() * schema.size());
    for (const auto& row : rows) {
        FeatureRow copy = row;
        copy.kind = kind;
        const auto v = copy.values();
        flat.insert(flat.end(), v.begin(), v.end());
    }
    return gbrt::SampleSet(schema, std::move(flat), targets);
}

std::string snapshot_key(int horizon, ModelKind kind, const LossTag& loss) {
    return std::to_string(horizon) + "/" + std::string(to_string(kind)) + "/" + loss.name();
}

gbrt::BoostConfig boost_config_json(const nlohmann::json& doc, gbrt::BoostConfig base) {
    base.n_trees = doc.value("n_trees", base.n_trees);
    base.learning_rate = doc.value("learning_rate", base.learning_rate);
    base.max_depth = doc.value("max_depth", base.max_depth);
    base.min_samples_leaf = doc.value("min_samples_leaf", base.min_samples_leaf);
    try {
        base.validate();
    } catch (const InvalidInput& e) {
        throw ConfigurationError(e.what());
    }
    return base;
}

nlohmann::json boost_json(const gbrt::BoostConfig& c) {
    return {{"n_trees", c.n_trees},
            {"learning_rate", c.learning_rate},
            {"max_depth", c.max_depth},
            {"min_samples_leaf", c.min_samples_leaf}};
}

} // namespace

// ------------------------------------------------------------ configuration

void EngineConfig::validate() const {
    if (rebuild_hour < 0 || rebuild_hour > 23 || rebuild_minute < 0 || rebuild_minute > 59) {
        throw ConfigurationError("rebuild time must be a valid HH:MM");
    }
    if (listen_port < 0 || listen_port > 65535) {
        throw ConfigurationError("listen port out of range");
    }
    for (const auto* c : {&basic, &advanced, &decile}) {
        try {
            c->validate();
        } catch (const InvalidInput& e) {
            throw ConfigurationError(e.what());
        }
    }
    for (const auto& country : countries) {
        check_country_code(country);
    }
}

EngineConfig engine_config_from_json(const nlohmann::json& doc) {
    EngineConfig c;
    try {
        c.data_dir = doc.value("data_dir", c.data_dir.string());
        c.calendar_dir = doc.value("calendar_dir", std::string{});
        c.countries = doc.value("countries", c.countries);
        c.zones = doc.value("zones", c.zones);
        if (doc.contains("rebuild_time")) {
            const auto text = doc.at("rebuild_time").get<std::string>();
            if (text.size() != 5 || text[2] != ':') {
                throw ConfigurationError("rebuild_time must look like HH:MM");
            }
            c.rebuild_hour = std::stoi(text.substr(0, 2));
            c.rebuild_minute = std::stoi(text.substr(3, 2));
        }
        c.deciles = doc.value("deciles", c.deciles);
        if (doc.contains("models")) {
            const auto& models = doc.at("models");
            if (models.contains("basic")) {
                c.basic = boost_config_json(models.at("basic"), c.basic);
            }
            if (models.contains("advanced")) {
                c.advanced = boost_config_json(models.at("advanced"), c.advanced);
            }
            if (models.contains("decile")) {
                c.decile = boost_config_json(models.at("decile"), c.decile);
            }
        }
        if (doc.contains("vertical_cutoff")) {
            c.vertical_cutoff = parse_timestamp(doc.at("vertical_cutoff").get<std::string>());
        }
        if (doc.contains("listen")) {
            const auto listen = doc.at("listen").get<std::string>();
            const auto colon = listen.rfind(':');
            if (colon == std::string::npos) {
                throw ConfigurationError("listen must look like host:port");
            }
            c.listen_host = listen.substr(0, colon);
            c.listen_port = std::stoi(listen.substr(colon + 1));
        }
        c.threads = doc.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("malformed configuration: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigurationError(std::string("malformed configuration: ") + e.what());
    }
    c.validate();
    return c;
}

EngineConfig load_engine_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigurationError("cannot read configuration " + file.string());
    }
    try {
        return engine_config_from_json(nlohmann::json::parse(in, nullptr, true, true));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(file.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const EngineConfig& c) {
    char rebuild[8];
    std::snprintf(rebuild, sizeof rebuild, "%02d:%02d", c.rebuild_hour, c.rebuild_minute);
    return {{"data_dir", c.data_dir.string()},
            {"calendar_dir", c.calendar_dir.string()},
            {"countries", c.countries},
            {"zones", c.zones},
            {"rebuild_time", rebuild},
            {"deciles", c.deciles},
            {"models", {{"basic", boost_json(c.basic)}, {"advanced", boost_json(c.advanced)}, {"decile", boost_json(c.decile)}}},
            {"vertical_cutoff", format_timestamp(c.vertical_cutoff)},
            {"listen", c.listen_host + ":" + std::to_string(c.listen_port)},
            {"threads", c.threads}};
}

// ---------------------------------------------------------------- records

nlohmann::json to_json(const ForecastRecord& r) {
    nlohmann::json deciles = nullptr;
    if (r.deciles) {
        deciles = nlohmann::json(std::vector<double>(r.deciles->begin(), r.deciles->end()));
    }
    return {{"country", r.country},
            {"issued_at", format_timestamp(r.issued_at)},
            {"target_time", format_timestamp(r.target_time)},
            {"horizon", r.horizon},
            {"kind", to_string(r.kind)},
            {"point", r.point},
            {"deciles", std::move(deciles)}};
}

ForecastRecord forecast_record_from_json(const nlohmann::json& doc) {
    ForecastRecord r;
    r.country = doc.at("country").get<std::string>();
    r.issued_at = parse_timestamp(doc.at("issued_at").get<std::string>());
    r.target_time = parse_timestamp(doc.at("target_time").get<std::string>());
    r.horizon = doc.at("horizon").get<int>();
    r.kind = model_kind_from_string(doc.at("kind").get<std::string>());
    r.point = doc.at("point").get<double>();
    if (const auto& d = doc.at("deciles"); !d.is_null()) {
        const auto values = d.get<std::vector<double>>();
        if (values.size() != 9) {
            throw InvalidInput("forecast record must carry nine deciles");
        }
        std::array<double, 9> a{};
        std::copy(values.begin(), values.end(), a.begin());
        r.deciles = a;
    }
    return r;
}

nlohmann::json to_json(const ForecastBatch& batch) {
    auto records = nlohmann::json::array();
    for (const auto& r : batch.records) {
        records.push_back(to_json(r));
    }
    auto errors = nlohmann::json::array();
    for (const auto& e : batch.errors) {
        errors.push_back({{"horizon", e.horizon}, {"message", e.message}});
    }
    return {{"country", batch.country},
            {"issued_at", format_timestamp(batch.issued_at)},
            {"records", std::move(records)},
            {"errors", std::move(errors)}};
}

ForecastBatch forecast_batch_from_json(const nlohmann::json& doc) {
    ForecastBatch b;
    b.country = doc.at("country").get<std::string>();
    b.issued_at = parse_timestamp(doc.at("issued_at").get<std::string>());
    for (const auto& r : doc.at("records")) {
        b.records.push_back(forecast_record_from_json(r));
    }
    for (const auto& e : doc.at("errors")) {
        b.errors.push_back({e.at("horizon").get<int>(), e.at("message").get<std::string>()});
    }
    return b;
}

std::array<double, 9> repair_decile_crossing(std::array<double, 9> deciles) {
    std::sort(deciles.begin(), deciles.end());
    return deciles;
}

std::size_t RebuildResult::count(ModelKind kind, bool deciles) const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const ModelRecord& r) {
        return r.kind == kind && r.loss.is_point() != deciles;
    }));
}

void ModelSnapshot::put(std::shared_ptr<const ModelRecord> record) {
    records_[snapshot_key(record->horizon, record->kind, record->loss)] = std::move(record);
}

const ModelRecord* ModelSnapshot::find(int horizon, ModelKind kind, const LossTag& loss) const {
    const auto it = records_.find(snapshot_key(horizon, kind, loss));
    return it == records_.end() ? nullptr : it->second.get();
}

// ----------------------------------------------------------------- Engine

Engine::Engine(EngineConfig config)
    : Engine(config, std::make_shared<DocumentStore>(config.data_dir)) {}

Engine::Engine(EngineConfig config, std::shared_ptr<DocumentStore> store)
    : config_(std::move(config)), store_(std::move(store)) {
    config_.validate();
    if (config_.calendar_dir.empty()) {
        config_.calendar_dir = config_.data_dir / "calendars";
    }
}

std::shared_mutex& Engine::country_lock(const std::string& country) {
    std::lock_guard guard(state_guard_);
    auto& slot = country_locks_[country];
    if (!slot) {
        slot = std::make_unique<std::shared_mutex>();
    }
    return *slot;
}

Calendar Engine::calendar_for(const std::string& country) const {
    std::string zone;
    if (const auto it = config_.zones.find(country); it != config_.zones.end()) {
        zone = it->second;
    } else {
        zone = country_zone(country);
    }
    if (zone.empty()) {
        throw ConfigurationError("no time zone configured for " + country);
    }
    const auto holidays = config_.calendar_dir / (country + ".txt");
    if (std::filesystem::exists(holidays)) {
        return Calendar::load(country, zone, holidays);
    }
    return Calendar(country, zone);
}

LoadSeries Engine::prepared_series(const std::string& country) const {
    const auto total = aggregate_to_hourly(store_->load_series(country, SourceKind::total_load));
    const auto vertical = store_->try_load_series(country, SourceKind::vertical_load);
    if (!vertical) {
        return total;
    }
    return merge_load_sources(total, aggregate_to_hourly(*vertical), config_.vertical_cutoff);
}

RebuildResult Engine::rebuild_models(const std::string& country, Timestamp now, std::optional<bool> deciles) {
    check_country_code(country);
    const auto calendar = calendar_for(country);
    return rebuild_models(country, prepared_series(country), calendar, now, deciles);
}

RebuildResult Engine::rebuild_models(const std::string& country, const LoadSeries& hourly, const Calendar& calendar,
                                     Timestamp now, std::optional<bool> deciles) {
    const bool with_deciles = deciles.value_or(config_.deciles);
    struct Job {
        int horizon;
        ModelKind kind;
        LossTag loss;
    };
    RebuildResult result;
    result.country = country;
    result.trained_at = now;

    std::vector<TrainingRows> rows(kMaxHorizon);
    parallel_for(kMaxHorizon, config_.threads,
                 [&](std::size_t i) { rows[i] = build_training_rows(hourly, calendar, static_cast<int>(i) + 1); });

    std::vector<Job> jobs;
    for (int h = 1; h <= kMaxHorizon; ++h) {
        const auto& r = rows[static_cast<std::size_t>(h - 1)];
        jobs.push_back({h, ModelKind::basic, LossTag::point()});
        if (r.advanced.empty()) {
            result.warnings.push_back("horizon " + std::to_string(h) + ": no training row has both lags (" +
                                      std::to_string(r.candidates) + " candidates); advanced model skipped");
            continue;
        }
        jobs.push_back({h, ModelKind::advanced, LossTag::point()});
        if (with_deciles) {
            for (int a : kDeciles) {
                jobs.push_back({h, ModelKind::advanced, LossTag::decile_at(a)});
            }
        }
    }

    std::vector<std::optional<ModelRecord>> trained(jobs.size());
    parallel_for(jobs.size(), config_.threads, [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto& r = rows[static_cast<std::size_t>(job.horizon - 1)];
        gbrt::BoostConfig boost = job.kind == ModelKind::basic ? config_.basic
                                  : job.loss.is_point()       ? config_.advanced
                                                              : config_.decile;
        boost.loss = job.loss.loss();
        const auto samples = job.kind == ModelKind::basic ? to_samples(r.basic, r.basic_targets, ModelKind::basic)
                                                          : to_samples(r.advanced, r.advanced_targets, ModelKind::advanced);
        trained[i].emplace(ModelRecord{country, job.horizon, job.kind, job.loss, now, feature_schema(job.kind),
                                       gbrt::fit(samples, boost)});
    });

    auto snapshot = std::make_shared<ModelSnapshot>();
    {
        std::unique_lock lock(country_lock(country));
        for (auto& record : trained) {
            store_->store_model(*record);
            snapshot->put(std::make_shared<const ModelRecord>(*record));
            result.records.push_back(std::move(*record));
        }
    }
    {
        std::lock_guard guard(state_guard_);
        snapshots_[country] = std::move(snapshot);
    }
    for (const auto& w : result.warnings) {
        spdlog::warn("{}: {}", country, w);
    }
    return result;
}

std::shared_ptr<const ModelSnapshot> Engine::load_snapshot(const std::string& country) {
    auto snapshot = std::make_shared<ModelSnapshot>();
    std::shared_lock lock(country_lock(country));
    for (int h = 1; h <= kMaxHorizon; ++h) {
        for (auto kind : {ModelKind::basic, ModelKind::advanced}) {
            if (auto r = store_->try_find_latest_model(country, h, kind)) {
                snapshot->put(std::make_shared<const ModelRecord>(std::move(*r)));
            }
        }
        for (int a : kDeciles) {
            if (auto r = store_->try_find_latest_model(country, h, ModelKind::advanced, LossTag::decile_at(a))) {
                snapshot->put(std::make_shared<const ModelRecord>(std::move(*r)));
            }
        }
    }
    return snapshot;
}

std::shared_ptr<const ModelSnapshot> Engine::snapshot(const std::string& country) {
    {
        std::lock_guard guard(state_guard_);
        if (const auto it = snapshots_.find(country); it != snapshots_.end()) {
            return it->second;
        }
    }
    auto loaded = load_snapshot(country);
    std::lock_guard guard(state_guard_);
    auto& slot = snapshots_[country];
    if (!slot) {
        slot = std::move(loaded);
    }
    return slot;
}

void Engine::invalidate(const std::string& country) {
    std::lock_guard guard(state_guard_);
    snapshots_.erase(country);
}

ForecastBatch Engine::forecast_next_24(const std::string& country, Timestamp now) {
    check_country_code(country);
    const auto models = snapshot(country);
    const auto calendar = calendar_for(country);
    const HourlyLookup lookup(prepared_series(country));
    const auto base = floor_hour(now);

    ForecastBatch batch;
    batch.country = country;
    batch.issued_at = now;
    for (int h = 1; h <= kMaxHorizon; ++h) {
        const auto target = base + std::chrono::hours{h};
        auto row = build_inference_row(lookup, calendar, target, h);
        const ModelRecord* model = nullptr;
        if (row.kind == ModelKind::advanced) {
            model = models->find(h, ModelKind::advanced);
        }
        if (model == nullptr) {
            row.kind = ModelKind::basic;
            row.lag_week.reset();
            row.lag_last_known.reset();
            model = models->find(h, ModelKind::basic);
        }
        if (model == nullptr) {
            batch.errors.push_back({h, "no model available for horizon " + std::to_string(h)});
            continue;
        }
        try {
            const auto x = row.values();
            ForecastRecord record{country, now, target, h, row.kind, model->model.predict(x), std::nullopt};
            if (row.kind == ModelKind::advanced) {
                std::array<double, 9> q{};
                bool complete = true;
                for (std::size_t i = 0; i < q.size() && complete; ++i) {
                    const auto* m = models->find(h, ModelKind::advanced, LossTag::decile_at(kDeciles[i]));
                    complete = m != nullptr;
                    if (complete) {
                        q[i] = m->model.predict(x);
                    }
                }
                if (complete) {
                    record.deciles = repair_decile_crossing(q);
                }
            }
            batch.records.push_back(std::move(record));
        } catch (const std::exception& e) {
            batch.errors.push_back({h, e.what()});
        }
    }
    return batch;
}

ForecastBatch Engine::issue_forecasts(const std::string& country, Timestamp now) {
    auto batch = forecast_next_24(country, now);
    store_->append_forecast_batch(country, to_json(batch));
    return batch;
}

std::vector<std::string> Engine::tracked_countries() const {
    if (!config_.countries.empty()) {
        return config_.countries;
    }
    return store_->series_countries();
}

// -------------------------------------------------------------- Scheduler

Scheduler::Scheduler(Engine& engine) : engine_(engine) {}

bool Scheduler::is_rebuild_time(const std::string& country, Timestamp minute) const {
    const auto it = calendars_.find(country);
    if (it == calendars_.end()) {
        return false;
    }
    const auto cs = it->second.zone().At(absl::FromUnixSeconds(unix_seconds(minute))).cs;
    return cs.hour() == engine_.config().rebuild_hour && cs.minute() == engine_.config().rebuild_minute;
}

void Scheduler::tick(Timestamp now) {
    using namespace std::chrono;
    now = floor<minutes>(now);
    if (!last_) {
        last_ = now;
        return;
    }
    if (!(now > *last_)) {
        return;
    }
    std::vector<std::string> countries;
    try {
        countries = engine_.tracked_countries();
    } catch (const std::exception& e) {
        spdlog::error("cannot list countries: {}", e.what());
        return;
    }
    for (const auto& c : countries) {
        if (!calendars_.contains(c)) {
            try {
                calendars_.emplace(c, engine_.calendar_for(c));
            } catch (const std::exception& e) {
                spdlog::error("{}: {}", c, e.what());
            }
        }
    }

    for (auto minute = *last_ + minutes{1}; minute <= now; minute += minutes{1}) {
        const bool hour_boundary = floor_hour(minute) == minute;
        for (const auto& country : countries) {
            if (is_rebuild_time(country, minute)) {
                const auto started = steady_clock::now();
                try {
                    auto result = engine_.rebuild_models(country, minute);
                    ++stats_.rebuilds;
                    spdlog::info("{}: rebuilt {} models in {} ms", country, result.records.size(),
                                 duration_cast<milliseconds>(steady_clock::now() - started).count());
                    if (on_rebuild) {
                        on_rebuild(result);
                    }
                } catch (const std::exception& e) {
                    ++stats_.rebuild_failures;
                    spdlog::error("{}: rebuild failed: {}", country, e.what());
                }
            }
            if (hour_boundary) {
                const auto started = steady_clock::now();
                try {
                    auto batch = engine_.issue_forecasts(country, minute);
                    ++stats_.batches;
                    spdlog::info("{}: issued {} forecasts ({} errors) in {} ms", country, batch.records.size(),
                                 batch.errors.size(),
                                 duration_cast<milliseconds>(steady_clock::now() - started).count());
                    if (on_batch) {
                        on_batch(batch);
                    }
                } catch (const std::exception& e) {
                    ++stats_.forecast_failures;
                    spdlog::error("{}: forecast failed: {}", country, e.what());
                }
            }
        }
    }
    last_ = now;
}

void Scheduler::run(std::stop_token stop, const Clock& clock) {
    using namespace std::chrono;
    while (!stop.stop_requested()) {
        const auto now = clock();
        tick(now);
        const auto next = floor<minutes>(now) + minutes{1};
        auto remaining = next - clock();
        while (remaining > seconds{0} && !stop.stop_requested()) {
            std::this_thread::sleep_for(std::min<std::chrono::nanoseconds>(remaining, seconds{1}));
            remaining = next - clock();
        }
    }
}

} // namespace loadcast
