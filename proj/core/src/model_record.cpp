#include "loadcast/model_record.hpp"

#include <algorithm>

#include "loadcast/errors.hpp"

namespace loadcast {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::basic ? "basic" : "advanced";
}

ModelKind model_kind_from_string(std::string_view text) {
    if (text == "basic") {
        return ModelKind::basic;
    }
    if (text == "advanced") {
        return ModelKind::advanced;
    }
    throw InvalidInput("unknown model kind '" + std::string(text) + "'");
}

LossTag LossTag::decile_at(int alpha) {
    if (std::find(std::begin(kDeciles), std::end(kDeciles), alpha) == std::end(kDeciles)) {
        throw InvalidInput("decile must be one of 10..90 in steps of 10, got " + std::to_string(alpha));
    }
    return LossTag{alpha};
}

std::string LossTag::name() const {
    return decile ? "decile(" + std::to_string(*decile) + ")" : "point";
}

LossTag LossTag::parse(std::string_view text) {
    if (text == "point") {
        return point();
    }
    if (text.starts_with("decile(") && text.ends_with(")")) {
        const std::string inner(text.substr(7, text.size() - 8));
        if (!inner.empty() && std::all_of(inner.begin(), inner.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
            inner.size() <= 2) {
            return decile_at(std::stoi(inner));
        }
    }
    throw InvalidInput("unknown loss tag '" + std::string(text) + "'");
}

void ModelRecord::validate() const {
    if (horizon < 1 || horizon > 24) {
        throw InvalidInput("horizon must be in 1..24");
    }
    if (feature_schema.size() != model.n_features()) {
        throw InvalidInput("feature schema arity differs from the model input arity");
    }
    if (kind == ModelKind::basic) {
        for (const auto& name : feature_schema) {
            if (name.starts_with("lag_")) {
                throw InvalidInput("basic model schema must not contain lag feature '" + name + "'");
            }
        }
    }
    if (model.config().loss != loss.loss()) {
        throw InvalidInput("loss tag " + loss.name() + " disagrees with model loss " + model.config().loss.name());
    }
}

nlohmann::json to_json(const ModelRecord& record) {
    return {{"country", record.country},
            {"horizon", record.horizon},
            {"kind", to_string(record.kind)},
            {"loss", record.loss.name()},
            {"trained_at", format_timestamp(record.trained_at)},
            {"feature_schema", record.feature_schema},
            {"model", gbrt::to_json(record.model)}};
}

ModelRecord model_record_from_json(const nlohmann::json& doc) {
    try {
        ModelRecord r{doc.at("country").get<std::string>(),
                      doc.at("horizon").get<int>(),
                      model_kind_from_string(doc.at("kind").get<std::string>()),
                      LossTag::parse(doc.at("loss").get<std::string>()),
                      parse_timestamp(doc.at("trained_at").get<std::string>()),
                      doc.at("feature_schema").get<std::vector<std::string>>(),
                      gbrt::model_from_json(doc.at("model"))};
        r.validate();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed model record: ") + e.what());
    }
}

} // namespace loadcast
