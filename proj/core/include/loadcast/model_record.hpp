#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadcast/gbrt.hpp"
#include "loadcast/timeutil.hpp"

namespace loadcast {

enum class ModelKind { basic, advanced };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view text);

/// Point forecast (squared loss) or one decile (quantile loss at `alpha`).
struct LossTag {
    std::optional<int> decile;

    static LossTag point() { return {}; }
    /// `alpha` in {10, 20, ..., 90}.
    static LossTag decile_at(int alpha);

    bool is_point() const noexcept { return !decile.has_value(); }
    gbrt::Loss loss() const { return decile ? gbrt::Loss::quantile(*decile) : gbrt::Loss::squared(); }
    /// "point" or "decile(30)".
    std::string name() const;
    static LossTag parse(std::string_view text);

    friend bool operator==(const LossTag&, const LossTag&) = default;
};

inline constexpr int kDeciles[] = {10, 20, 30, 40, 50, 60, 70, 80, 90};

/// A persisted model together with the metadata used to select it.
struct ModelRecord {
    std::string country;
    int horizon = 1;
    ModelKind kind = ModelKind::basic;
    LossTag loss;
    Timestamp trained_at;
    std::vector<std::string> feature_schema;
    gbrt::BoostedModel model;

    /// Throws InvalidInput when schema arity and kind disagree with the model.
    void validate() const;
};

nlohmann::json to_json(const ModelRecord& record);
ModelRecord model_record_from_json(const nlohmann::json& doc);

} // namespace loadcast
