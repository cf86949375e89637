#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/ingestion.hpp"
#include "loadcast/model_record.hpp"

namespace loadcast {

/// File-backed document store.
///
/// Layout below the root directory:
///
///     series/<country>.docs                       load series snapshots
///     models/<country>/<horizon>/<kind>.docs      model records
///     forecasts/<country>.docs                    issued forecast batches
///
/// Every `.docs` file holds one JSON document per line and only grows.
/// Appends rewrite the file into a temporary sibling and rename it over the
/// original, so concurrent readers see either the old or the new content.
/// One store instance serialises its own writers per file; running two
/// writer processes against the same files is not supported.
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Appends `series` unless it equals the latest stored snapshot for the
    /// same (country, source). Returns true when a document was written.
    bool store_series(const LoadSeries& series);

    /// Latest snapshot; throws NotFound.
    LoadSeries load_series(const std::string& country, SourceKind source = SourceKind::total_load) const;
    std::optional<LoadSeries> try_load_series(const std::string& country,
                                              SourceKind source = SourceKind::total_load) const;

    /// Countries with at least one stored series, sorted.
    std::vector<std::string> series_countries() const;

    void store_model(const ModelRecord& record);

    /// Record with the greatest trained_at (ties: the later append) among
    /// those matching all keys. Throws NotFound.
    ModelRecord find_latest_model(const std::string& country, int horizon, ModelKind kind,
                                  const LossTag& loss = LossTag::point()) const;
    std::optional<ModelRecord> try_find_latest_model(const std::string& country, int horizon, ModelKind kind,
                                                     const LossTag& loss = LossTag::point()) const;

    /// Greatest trained_at over every model of a country, if any.
    std::optional<Timestamp> latest_model_time(const std::string& country) const;

    /// Number of model documents stored for (country, horizon, kind).
    std::size_t model_count(const std::string& country, int horizon, ModelKind kind) const;

    void append_forecast_batch(const std::string& country, const nlohmann::json& batch);
    std::vector<nlohmann::json> forecast_batches(const std::string& country) const;

    std::filesystem::path series_path(const std::string& country) const;
    std::filesystem::path model_path(const std::string& country, int horizon, ModelKind kind) const;
    std::filesystem::path forecast_path(const std::string& country) const;

private:
    void append(const std::filesystem::path& file, const nlohmann::json& doc);
    std::mutex& writer_lock(const std::filesystem::path& file);

    std::filesystem::path root_;
    mutable std::mutex locks_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Parses every line of a `.docs` file. Throws IntegrityError naming the
/// file on the first undecodable line; a missing file yields no documents.
std::vector<nlohmann::json> read_documents(const std::filesystem::path& file);

/// Rejects identifiers that would escape the store directory.
void check_country_code(const std::string& country);

} // namespace loadcast
