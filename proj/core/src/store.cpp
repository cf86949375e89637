#include "loadcast/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "loadcast/errors.hpp"

namespace loadcast {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& file) {
    std::vector<std::string> lines;
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        return lines;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

nlohmann::json parse_line(const fs::path& file, const std::string& line, std::size_t number) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(file.string(), "document " + std::to_string(number) + " is corrupt: " + e.what());
    }
}

// Parses only the metadata of a model record; the (large) model body is skipped.
nlohmann::json parse_model_header(const fs::path& file, const std::string& line, std::size_t number) {
    const nlohmann::json::parser_callback_t skip_model = [](int depth, nlohmann::json::parse_event_t event,
                                                            nlohmann::json& parsed) {
        return !(depth == 1 && event == nlohmann::json::parse_event_t::key && parsed == "model");
    };
    try {
        return nlohmann::json::parse(line, skip_model);
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(file.string(), "document " + std::to_string(number) + " is corrupt: " + e.what());
    }
}

std::atomic<unsigned long> temp_counter{0};

} // namespace

void check_country_code(const std::string& country) {
    if (country.empty() || country.size() > 64) {
        throw InvalidInput("country code must be 1..64 characters");
    }
    for (char c : country) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_';
        if (!ok) {
            throw InvalidInput("country code '" + country + "' contains unsupported characters");
        }
    }
}

std::vector<nlohmann::json> read_documents(const fs::path& file) {
    std::vector<nlohmann::json> docs;
    const auto lines = read_lines(file);
    docs.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        docs.push_back(parse_line(file, lines[i], i + 1));
    }
    return docs;
}

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

fs::path DocumentStore::series_path(const std::string& country) const {
    check_country_code(country);
    return root_ / "series" / (country + ".docs");
}

fs::path DocumentStore::model_path(const std::string& country, int horizon, ModelKind kind) const {
    check_country_code(country);
    return root_ / "models" / country / std::to_string(horizon) / (std::string(to_string(kind)) + ".docs");
}

fs::path DocumentStore::forecast_path(const std::string& country) const {
    check_country_code(country);
    return root_ / "forecasts" / (country + ".docs");
}

std::mutex& DocumentStore::writer_lock(const fs::path& file) {
    std::lock_guard guard(locks_guard_);
    auto& slot = locks_[file.string()];
    if (!slot) {
        slot = std::make_unique<std::mutex>();
    }
    return *slot;
}

void DocumentStore::append(const fs::path& file, const nlohmann::json& doc) {
    std::lock_guard guard(writer_lock(file));
    fs::create_directories(file.parent_path());
    const auto temp = file.parent_path() /
                      (file.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                       std::to_string(temp_counter.fetch_add(1)));
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::internal, "cannot write " + temp.string());
        }
        std::ifstream in(file, std::ios::binary);
        if (in) {
            out << in.rdbuf();
        }
        out << doc.dump() << '\n';
        out.flush();
        if (!out) {
            throw Error(ErrorCode::internal, "short write to " + temp.string());
        }
    }
    fs::rename(temp, file);
}

bool DocumentStore::store_series(const LoadSeries& series) {
    series.validate();
    if (const auto latest = try_load_series(series.country, series.source); latest && *latest == series) {
        return false;
    }
    append(series_path(series.country), to_json(series));
    return true;
}

std::optional<LoadSeries> DocumentStore::try_load_series(const std::string& country, SourceKind source) const {
    const auto file = series_path(country);
    const auto lines = read_lines(file);
    for (std::size_t i = lines.size(); i-- > 0;) {
        const auto doc = parse_line(file, lines[i], i + 1);
        try {
            auto series = series_from_json(doc);
            if (series.source == source) {
                return series;
            }
        } catch (const std::exception& e) {
            throw IntegrityError(file.string(), "document " + std::to_string(i + 1) + " is not a series: " + e.what());
        }
    }
    return std::nullopt;
}

LoadSeries DocumentStore::load_series(const std::string& country, SourceKind source) const {
    auto series = try_load_series(country, source);
    if (!series) {
        throw NotFound("no " + std::string(to_string(source)) + " series stored for " + country);
    }
    return std::move(*series);
}

std::vector<std::string> DocumentStore::series_countries() const {
    std::vector<std::string> out;
    const auto dir = root_ / "series";
    if (!fs::exists(dir)) {
        return out;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".docs") {
            out.push_back(entry.path().stem().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void DocumentStore::store_model(const ModelRecord& record) {
    record.validate();
    append(model_path(record.country, record.horizon, record.kind), to_json(record));
}

std::optional<ModelRecord> DocumentStore::try_find_latest_model(const std::string& country, int horizon,
                                                                ModelKind kind, const LossTag& loss) const {
    const auto file = model_path(country, horizon, kind);
    const auto lines = read_lines(file);
    std::optional<std::size_t> best;
    Timestamp best_time{};
    const auto wanted = loss.name();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto header = parse_model_header(file, lines[i], i + 1);
        try {
            if (header.at("loss").get<std::string>() != wanted || header.at("horizon").get<int>() != horizon ||
                header.at("country").get<std::string>() != country) {
                continue;
            }
            const auto t = parse_timestamp(header.at("trained_at").get<std::string>());
            if (!best || t >= best_time) {
                best = i;
                best_time = t;
            }
        } catch (const std::exception& e) {
            throw IntegrityError(file.string(), "document " + std::to_string(i + 1) + " lacks metadata: " + e.what());
        }
    }
    if (!best) {
        return std::nullopt;
    }
    try {
        return model_record_from_json(parse_line(file, lines[*best], *best + 1));
    } catch (const InvalidInput& e) {
        throw IntegrityError(file.string(), "document " + std::to_string(*best + 1) + ": " + e.what());
    }
}

ModelRecord DocumentStore::find_latest_model(const std::string& country, int horizon, ModelKind kind,
                                             const LossTag& loss) const {
    auto record = try_find_latest_model(country, horizon, kind, loss);
    if (!record) {
        throw NotFound("no " + std::string(to_string(kind)) + " " + loss.name() + " model for " + country +
                       " at horizon " + std::to_string(horizon));
    }
    return std::move(*record);
}

std::optional<Timestamp> DocumentStore::latest_model_time(const std::string& country) const {
    std::optional<Timestamp> latest;
    const auto dir = root_ / "models" / country;
    check_country_code(country);
    if (!fs::exists(dir)) {
        return latest;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".docs") {
            continue;
        }
        const auto lines = read_lines(entry.path());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto header = parse_model_header(entry.path(), lines[i], i + 1);
            const auto t = parse_timestamp(header.at("trained_at").get<std::string>());
            if (!latest || t > *latest) {
                latest = t;
            }
        }
    }
    return latest;
}

std::size_t DocumentStore::model_count(const std::string& country, int horizon, ModelKind kind) const {
    return read_lines(model_path(country, horizon, kind)).size();
}

void DocumentStore::append_forecast_batch(const std::string& country, const nlohmann::json& batch) {
    append(forecast_path(country), batch);
}

std::vector<nlohmann::json> DocumentStore::forecast_batches(const std::string& country) const {
    return read_documents(forecast_path(country));
}

} // namespace loadcast
