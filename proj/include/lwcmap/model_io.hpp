#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "lwcmap/model.hpp"
#include "lwcmap/version.hpp"

namespace lwcmap {

namespace detail {

using nlohmann::json;

inline json tree_to_json(const RegressionTree& t) {
    return json{{"feature", t.feature},
                {"threshold", t.threshold},
                {"left", t.left},
                {"right", t.right},
                {"value", t.value}};
}

inline RegressionTree tree_from_json(const json& j, std::size_t n_features) {
    RegressionTree t;
    t.feature = j.at("feature").get<std::vector<int>>();
    t.threshold = j.at("threshold").get<std::vector<double>>();
    t.left = j.at("left").get<std::vector<int>>();
    t.right = j.at("right").get<std::vector<int>>();
    t.value = j.at("value").get<std::vector<double>>();
    const std::size_t n = t.feature.size();
    if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
        t.value.size() != n)
        fail("CorruptPayload", "tree node arrays have mismatched lengths");
    for (std::size_t i = 0; i < n; ++i) {
        int f = t.feature[i], l = t.left[i], r = t.right[i];
        if (f >= 0) {
            if (static_cast<std::size_t>(f) >= n_features)
                fail("CorruptPayload", "tree split feature index out of range");
            if (l < 0 || r < 0 || static_cast<std::size_t>(l) >= n ||
                static_cast<std::size_t>(r) >= n)
                fail("CorruptPayload", "tree child index out of range");
        } else if (l != -1 || r != -1) {
            fail("CorruptPayload", "leaf node with children");
        }
    }
    return t;
}

inline json model_to_json_body(const TrainedModel& m);

inline json payload_to_json(const TrainedModel& m) {
    switch (m.model_type) {
        case ModelType::Gbm: {
            const auto& p = std::get<GbmPayload>(m.payload);
            json trees = json::array();
            for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
            return json{{"init", p.init},
                        {"learning_rate", p.learning_rate},
                        {"trees", std::move(trees)}};
        }
        case ModelType::LassoCv: {
            const auto& p = std::get<LassoPayload>(m.payload);
            return json{{"coefficients", p.coefficients},
                        {"intercept", p.intercept},
                        {"lambda", p.lambda}};
        }
        case ModelType::RandomForest: {
            const auto& p = std::get<ForestPayload>(m.payload);
            json trees = json::array();
            for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
            return json{{"trees", std::move(trees)}, {"mtry", p.mtry}, {"bootstrap", p.bootstrap}};
        }
        default: {
            const auto& p = std::get<StackedPayload>(m.payload);
            json bases = json::array();
            for (const auto& b : p.base_models) bases.push_back(model_to_json_body(b));
            return json{{"base_models", std::move(bases)},
                        {"meta_weights", p.meta_weights},
                        {"meta_intercept", p.meta_intercept}};
        }
    }
}

inline json model_to_json_body(const TrainedModel& m) {
    return json{{"model_type", model_type_name(m.model_type)},
                {"seed", m.seed},
                {"feature_names", m.feature_names},
                {"standardizer", json{{"means", m.standardizer.means}, {"stds", m.standardizer.stds}}},
                {"payload", payload_to_json(m)}};
}

inline TrainedModel model_from_json_body(const json& j);

inline TrainedModel model_from_json_body(const json& j) {
    TrainedModel m;
    std::string type = j.at("model_type").get<std::string>();
    if (type == "gbm") m.model_type = ModelType::Gbm;
    else if (type == "lasso_cv") m.model_type = ModelType::LassoCv;
    else if (type == "random_forest") m.model_type = ModelType::RandomForest;
    else if (type == "stacked") m.model_type = ModelType::Stacked;
    else fail("CorruptPayload", "unknown model_type '" + type + "'");

    m.seed = j.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const std::size_t p = m.feature_names.size();
    if (p == 0) fail("CorruptPayload", "empty feature_names");

    const auto& st = j.at("standardizer");
    m.standardizer.means = st.at("means").get<std::vector<double>>();
    m.standardizer.stds = st.at("stds").get<std::vector<double>>();
    if (m.standardizer.means.size() != p || m.standardizer.stds.size() != p)
        fail("CorruptPayload", "standardizer length != feature_names length");
    for (double s : m.standardizer.stds)
        if (!(s > 0)) fail("CorruptPayload", "standardizer stddev must be > 0");

    const auto& pay = j.at("payload");
    switch (m.model_type) {
        case ModelType::Gbm: {
            GbmPayload g;
            g.init = pay.at("init").get<double>();
            g.learning_rate = pay.at("learning_rate").get<double>();
            for (const auto& tj : pay.at("trees")) g.trees.push_back(tree_from_json(tj, p));
            m.payload = std::move(g);
            break;
        }
        case ModelType::LassoCv: {
            LassoPayload l;
            l.coefficients = pay.at("coefficients").get<std::vector<double>>();
            l.intercept = pay.at("intercept").get<double>();
            l.lambda = pay.at("lambda").get<double>();
            if (l.coefficients.size() != p)
                fail("CorruptPayload", "coefficient count != feature_names length");
            m.payload = std::move(l);
            break;
        }
        case ModelType::RandomForest: {
            ForestPayload f;
            f.mtry = pay.at("mtry").get<int>();
            f.bootstrap = pay.at("bootstrap").get<bool>();
            for (const auto& tj : pay.at("trees")) f.trees.push_back(tree_from_json(tj, p));
            if (f.trees.empty()) fail("CorruptPayload", "forest with zero trees");
            m.payload = std::move(f);
            break;
        }
        default: {
            StackedPayload s;
            for (const auto& bj : pay.at("base_models")) {
                TrainedModel base = model_from_json_body(bj);
                if (base.feature_names != m.feature_names)
                    fail("CorruptPayload", "stacked base model feature_names mismatch");
                s.base_models.push_back(std::move(base));
            }
            s.meta_weights = pay.at("meta_weights").get<std::vector<double>>();
            s.meta_intercept = pay.at("meta_intercept").get<double>();
            if (s.base_models.empty() || s.meta_weights.size() != s.base_models.size())
                fail("CorruptPayload", "meta_weights length != base model count");
            m.payload = std::move(s);
            break;
        }
    }
    return m;
}

} // namespace detail

// Versioned JSON document; save then load reproduces predictions bit-exactly
// (doubles serialize with shortest round-trip precision).
inline void save_model(const TrainedModel& m, const std::string& path) {
    detail::json doc = detail::model_to_json_body(m);
    doc["schema_version"] = kModelSchemaVersion;
    std::ofstream out(path);
    if (!out) fail_io("IoFailure", "cannot write model file '" + path + "'");
    out << doc.dump(2) << "\n";
    if (!out) fail_io("IoFailure", "write failed for '" + path + "'");
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("IoFailure", "cannot open model file '" + path + "'");
    detail::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail("CorruptPayload", std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.contains("schema_version"))
            fail("SchemaVersionMismatch", "model file missing schema_version");
        int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            fail("SchemaVersionMismatch", "schema_version " + std::to_string(version) +
                                              " unsupported (expected " +
                                              std::to_string(kModelSchemaVersion) + ")");
        return detail::model_from_json_body(doc);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail("CorruptPayload", std::string("malformed model document: ") + e.what());
    }
}

} // namespace lwcmap
