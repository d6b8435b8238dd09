#include "cdri/pipeline.hpp"

#include "cdri/forecast_linear.hpp"
#include "cdri/forecast_neural.hpp"
#include "cdri/forecast_trees.hpp"
#include "cdri/rng.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cdri {

namespace {

constexpr std::array<std::string_view, kModelCount> kDisplayNames = {
    "Linear Regression", "Decision Tree", "Random Forest",
    "Gradient Boosting", "VAR",           "LSTM",
};

constexpr std::array<std::string_view, kModelCount> kKeys = {
    "linear_regression", "decision_tree", "random_forest",
    "gradient_boosting", "var",           "lstm",
};

} // namespace

std::string_view model_display_name(ModelKind kind) {
    return kDisplayNames[static_cast<std::size_t>(kind)];
}

std::string_view model_key(ModelKind kind) {
    return kKeys[static_cast<std::size_t>(kind)];
}

std::optional<ModelKind> model_from_key(std::string_view key) {
    for (std::size_t i = 0; i < kModelCount; ++i) {
        if (key == kKeys[i]) {
            return kModelKinds[i];
        }
    }
    return std::nullopt;
}

namespace {

int parse_int_value(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw std::invalid_argument("config key '" + key + "': integer expected, got '" + value + "'");
    }
    return out;
}

double parse_double_value(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw std::invalid_argument("config key '" + key + "': number expected, got '" + value + "'");
    }
    return out;
}

bool parse_bool_value(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config key '" + key + "': boolean expected, got '" + value + "'");
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw std::invalid_argument(message);
    }
}

} // namespace

void set_config_key(ForecastConfig& config, const std::string& key, const std::string& value) {
    if (key == "interval") {
        config.interval = parse_int_value(key, value);
        require(config.interval > 0, "config key 'interval' must be positive");
    } else if (key == "var.lambda") {
        config.var_lambda = parse_double_value(key, value);
        require(config.var_lambda >= 0.0, "config key 'var.lambda' must be nonnegative");
    } else if (key == "tree.max_depth") {
        config.tree_max_depth = parse_int_value(key, value);
    } else if (key == "tree.min_samples_leaf") {
        config.tree_min_samples_leaf = parse_int_value(key, value);
        require(config.tree_min_samples_leaf >= 1, "config key 'tree.min_samples_leaf' must be >= 1");
    } else if (key == "forest.n_trees") {
        config.forest_trees = parse_int_value(key, value);
        require(config.forest_trees >= 1, "config key 'forest.n_trees' must be >= 1");
    } else if (key == "forest.bootstrap") {
        config.forest_bootstrap = parse_bool_value(key, value);
    } else if (key == "boost.n_stages") {
        config.boost_stages = parse_int_value(key, value);
        require(config.boost_stages >= 0, "config key 'boost.n_stages' must be >= 0");
    } else if (key == "boost.learning_rate") {
        config.boost_learning_rate = parse_double_value(key, value);
        require(config.boost_learning_rate > 0.0 && config.boost_learning_rate <= 1.0,
                "config key 'boost.learning_rate' must lie in (0, 1]");
    } else if (key == "boost.max_depth") {
        config.boost_max_depth = parse_int_value(key, value);
    } else if (key == "lstm.hidden") {
        config.lstm_hidden = parse_int_value(key, value);
        require(config.lstm_hidden >= 1, "config key 'lstm.hidden' must be >= 1");
    } else if (key == "lstm.epochs") {
        config.lstm_epochs = parse_int_value(key, value);
        require(config.lstm_epochs >= 0, "config key 'lstm.epochs' must be >= 0");
    } else if (key == "lstm.step") {
        config.lstm_step = parse_double_value(key, value);
        require(config.lstm_step > 0.0, "config key 'lstm.step' must be positive");
    } else {
        throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
}

std::string describe_config(const ForecastConfig& c) {
    std::ostringstream out;
    out << "interval=" << c.interval << " var.lambda=" << c.var_lambda
        << " tree.max_depth=" << c.tree_max_depth
        << " tree.min_samples_leaf=" << c.tree_min_samples_leaf
        << " forest.n_trees=" << c.forest_trees
        << " forest.bootstrap=" << (c.forest_bootstrap ? "true" : "false")
        << " boost.n_stages=" << c.boost_stages << " boost.learning_rate=" << c.boost_learning_rate
        << " boost.max_depth=" << c.boost_max_depth << " lstm.hidden=" << c.lstm_hidden
        << " lstm.epochs=" << c.lstm_epochs << " lstm.step=" << c.lstm_step;
    return out.str();
}

std::string dataset_fingerprint(const PanelDataset& dataset) {
    Fnv1a64 hash;
    hash.update("cdri-dataset/1", 14);
    for (const AssessmentRecord& rec : dataset.records()) {
        hash.update(rec.expert_id.data(), rec.expert_id.size());
        hash.update("\0", 1);
        hash.update_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(rec.year)));
        hash.update_u64(static_cast<std::uint64_t>(rec.dimension));
        for (const ParameterScore& p : rec.parameters) {
            hash.update_u64(static_cast<std::uint64_t>(p.parameter_id));
            hash.update_u64(std::bit_cast<std::uint64_t>(p.score));
            hash.update_u64(std::bit_cast<std::uint64_t>(p.weight));
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash.value()));
    return buf;
}

namespace {

nlohmann::json tree_nodes_json(const RegressionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) {
            nodes.push_back({{"samples", node.samples}, {"value", node.value}});
        } else {
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"samples", node.samples}});
        }
    }
    return nodes;
}

// Per-dimension training samples for the tree family: features are the time
// index and the previous aggregate score of the same dimension; targets are
// the expert-level scores, so the sample count is experts x (years - 1).
void tree_samples(const SeriesPanel& panel, std::size_t dim, FeatureMatrix& X,
                  std::vector<double>& y) {
    X.clear();
    y.clear();
    for (std::size_t k = 1; k < panel.years.size(); ++k) {
        for (std::size_t e = 0; e < panel.experts.size(); ++e) {
            if (!panel.expert_rows[e][k]) {
                continue;
            }
            X.push_back({panel.t[k], panel.aggregate[k - 1][dim]});
            y.push_back((*panel.expert_rows[e][k])[dim]);
        }
    }
}

double horizon_t(const SeriesPanel& panel, int step) {
    return static_cast<double>(panel.years.back() - panel.years.front() +
                               step * panel.interval) /
           static_cast<double>(panel.interval);
}

template <typename Predictor>
std::array<double, kDimensionCount> roll_tree_forecast(const SeriesPanel& panel, int steps,
                                                       const Predictor& predict_dim) {
    std::array<double, kDimensionCount> out{};
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        double lag = panel.aggregate.back()[d];
        double pred = lag;
        for (int s = 1; s <= steps; ++s) {
            std::array<double, 2> x = {horizon_t(panel, s), lag};
            pred = predict_dim(d, x);
            lag = pred;
        }
        out[d] = pred;
    }
    return out;
}

struct RawForecast {
    std::array<std::array<double, kDimensionCount>, kModelCount> prediction{};
    std::array<nlohmann::json, kModelCount> hyperparameters{};
    std::array<nlohmann::json, kModelCount> model_json{};
    std::vector<double> lstm_loss;
};

RawForecast forecast_raw(const SeriesPanel& panel, int steps, const ForecastConfig& config,
                         std::uint64_t seed) {
    RawForecast raw;

    // Linear Regression: an independent OLS trend per dimension.
    {
        nlohmann::json per_dim = nlohmann::json::array();
        std::array<double, kDimensionCount> pred{};
        double t_h = horizon_t(panel, steps);
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            std::vector<double> ys;
            ys.reserve(panel.aggregate.size());
            for (const auto& row : panel.aggregate) {
                ys.push_back(row[d]);
            }
            OlsModel model = fit_ols(panel.t, ys);
            pred[d] = model.predict(t_h);
            per_dim.push_back({{"intercept", model.intercept}, {"slope", model.slope}});
        }
        auto idx = static_cast<std::size_t>(ModelKind::LinearRegression);
        raw.prediction[idx] = pred;
        raw.hyperparameters[idx] = {{"per_dimension", true}};
        raw.model_json[idx] = {{"per_dimension", per_dim}};
    }

    // Decision Tree.
    {
        std::array<RegressionTree, kDimensionCount> trees;
        FeatureMatrix X;
        std::vector<double> y;
        nlohmann::json per_dim = nlohmann::json::array();
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            tree_samples(panel, d, X, y);
            trees[d] = fit_tree(X, y, config.tree_max_depth, config.tree_min_samples_leaf);
            per_dim.push_back({{"nodes", tree_nodes_json(trees[d])}});
        }
        auto idx = static_cast<std::size_t>(ModelKind::DecisionTree);
        raw.prediction[idx] = roll_tree_forecast(
            panel, steps, [&](std::size_t d, std::span<const double> x) { return trees[d].predict(x); });
        raw.hyperparameters[idx] = {{"max_depth", config.tree_max_depth},
                                    {"min_samples_leaf", config.tree_min_samples_leaf}};
        raw.model_json[idx] = {{"per_dimension", per_dim}};
    }

    // Random Forest.
    {
        std::uint64_t forest_seed = derive_seed(seed, static_cast<std::uint64_t>(ModelKind::RandomForest));
        std::array<ForestModel, kDimensionCount> forests;
        FeatureMatrix X;
        std::vector<double> y;
        nlohmann::json per_dim = nlohmann::json::array();
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            tree_samples(panel, d, X, y);
            forests[d] = fit_forest(X, y, config.forest_trees, config.forest_bootstrap,
                                    derive_seed(forest_seed, d), config.tree_max_depth,
                                    config.tree_min_samples_leaf);
            nlohmann::json member_trees = nlohmann::json::array();
            for (const RegressionTree& tree : forests[d].trees) {
                member_trees.push_back({{"nodes", tree_nodes_json(tree)}});
            }
            per_dim.push_back({{"trees", std::move(member_trees)}});
        }
        auto idx = static_cast<std::size_t>(ModelKind::RandomForest);
        raw.prediction[idx] = roll_tree_forecast(
            panel, steps,
            [&](std::size_t d, std::span<const double> x) { return forests[d].predict(x); });
        raw.hyperparameters[idx] = {{"n_trees", config.forest_trees},
                                    {"bootstrap", config.forest_bootstrap},
                                    {"max_depth", config.tree_max_depth},
                                    {"min_samples_leaf", config.tree_min_samples_leaf},
                                    {"seed", forest_seed}};
        raw.model_json[idx] = {{"per_dimension", per_dim}};
    }

    // Gradient Boosting.
    {
        std::array<BoostModel, kDimensionCount> boosts;
        FeatureMatrix X;
        std::vector<double> y;
        nlohmann::json per_dim = nlohmann::json::array();
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            tree_samples(panel, d, X, y);
            boosts[d] = fit_boost(X, y, config.boost_stages, config.boost_learning_rate,
                                  config.boost_max_depth, config.tree_min_samples_leaf);
            nlohmann::json stages = nlohmann::json::array();
            for (const BoostStage& stage : boosts[d].stages) {
                stages.push_back({{"learning_rate", stage.learning_rate},
                                  {"nodes", tree_nodes_json(stage.tree)}});
            }
            per_dim.push_back({{"initial", boosts[d].initial},
                               {"stages", std::move(stages)},
                               {"train_mse", boosts[d].train_mse}});
        }
        auto idx = static_cast<std::size_t>(ModelKind::GradientBoosting);
        raw.prediction[idx] = roll_tree_forecast(
            panel, steps,
            [&](std::size_t d, std::span<const double> x) { return boosts[d].predict(x); });
        raw.hyperparameters[idx] = {{"n_stages", config.boost_stages},
                                    {"learning_rate", config.boost_learning_rate},
                                    {"max_depth", config.boost_max_depth},
                                    {"min_samples_leaf", config.tree_min_samples_leaf}};
        raw.model_json[idx] = {{"per_dimension", per_dim}};
    }

    // VAR.
    {
        VarModel model = fit_var(panel.aggregate, config.var_lambda);
        auto idx = static_cast<std::size_t>(ModelKind::Var);
        raw.prediction[idx] = predict_var(model, panel.aggregate.back(), steps);
        raw.hyperparameters[idx] = {{"lag", 1}, {"lambda", config.var_lambda}};
        nlohmann::json coeff = nlohmann::json::array();
        for (const auto& row : model.coefficients) {
            coeff.push_back(row);
        }
        raw.model_json[idx] = {{"intercept", model.intercept},
                               {"coefficients", std::move(coeff)},
                               {"lambda", model.lambda}};
    }

    // LSTM.
    {
        LstmConfig lc;
        lc.hidden_size = config.lstm_hidden;
        lc.epochs = config.lstm_epochs;
        lc.step_size = config.lstm_step;
        lc.seed = derive_seed(seed, static_cast<std::uint64_t>(ModelKind::Lstm));
        LstmModel model = lstm_train(panel, lc);
        auto idx = static_cast<std::size_t>(ModelKind::Lstm);
        raw.prediction[idx] = lstm_predict(model, panel, steps);
        raw.hyperparameters[idx] = {{"hidden_size", lc.hidden_size},
                                    {"epochs", lc.epochs},
                                    {"step_size", lc.step_size},
                                    {"seed", lc.seed}};
        raw.lstm_loss = model.loss_history;
    }

    return raw;
}

} // namespace

PredictionReport run_forecast(const PanelDataset& dataset, int horizon_year,
                              const ForecastConfig& config, std::uint64_t seed) {
    SeriesPanel panel = build_series(dataset, config.interval);
    int last_year = panel.years.back();
    if (horizon_year <= last_year) {
        throw std::invalid_argument("run_forecast: horizon year " + std::to_string(horizon_year) +
                                    " is not ahead of the data (last year " +
                                    std::to_string(last_year) + ")");
    }
    if ((horizon_year - last_year) % config.interval != 0) {
        throw std::invalid_argument("run_forecast: horizon year " + std::to_string(horizon_year) +
                                    " is not a whole number of " + std::to_string(config.interval) +
                                    "-year intervals ahead of " + std::to_string(last_year));
    }
    int steps = (horizon_year - last_year) / config.interval;

    RawForecast raw = forecast_raw(panel, steps, config, seed);

    PredictionReport report;
    report.horizon_year = horizon_year;
    report.interval = config.interval;
    report.seed = seed;
    report.dataset_fingerprint = dataset_fingerprint(dataset);
    report.lstm_loss = std::move(raw.lstm_loss);
    for (std::size_t m = 0; m < kModelCount; ++m) {
        ModelPrediction& entry = report.models[m];
        entry.kind = kModelKinds[m];
        entry.hyperparameters = std::move(raw.hyperparameters[m]);
        entry.model = std::move(raw.model_json[m]);
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            double value = raw.prediction[m][d];
            double clamped = std::min(5.0, std::max(1.0, value));
            entry.prediction[d] = clamped;
            entry.clamped[d] = clamped != value;
        }
    }
    return report;
}

std::array<BacktestEntry, kModelCount> backtest(const PanelDataset& dataset,
                                                const ForecastConfig& config, std::uint64_t seed) {
    if (dataset.years().size() < 3) {
        throw std::invalid_argument("backtest: need at least 3 years, got " +
                                    std::to_string(dataset.years().size()));
    }
    int held_out = dataset.years().back();
    std::vector<AssessmentRecord> train_records;
    for (const AssessmentRecord& rec : dataset.records()) {
        if (rec.year < held_out) {
            train_records.push_back(rec);
        }
    }
    PanelDataset train = PanelDataset::from_records(std::move(train_records));
    PredictionReport report = run_forecast(train, held_out, config, seed);
    ResilienceVector actual = aggregate_experts(dataset, held_out);

    std::array<BacktestEntry, kModelCount> entries{};
    for (std::size_t m = 0; m < kModelCount; ++m) {
        BacktestEntry& entry = entries[m];
        entry.kind = kModelKinds[m];
        entry.predicted = report.models[m].prediction;
        entry.actual = actual.scores;
        double sum = 0.0;
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            entry.abs_error[d] = std::abs(entry.predicted[d] - entry.actual[d]);
            sum += entry.abs_error[d];
        }
        entry.mean_abs_error = sum / static_cast<double>(kDimensionCount);
    }
    return entries;
}

nlohmann::json PredictionReport::to_json() const {
    nlohmann::json doc;
    doc["schema"] = "cdri-report/1";
    doc["horizon_year"] = horizon_year;
    doc["interval"] = interval;
    doc["seed"] = seed;
    doc["dataset_fingerprint"] = dataset_fingerprint;
    doc["lstm_loss"] = lstm_loss;
    nlohmann::json model_array = nlohmann::json::array();
    for (const ModelPrediction& entry : models) {
        nlohmann::json m;
        m["kind"] = std::string(model_key(entry.kind));
        m["prediction"] = entry.prediction;
        m["clamped"] = entry.clamped;
        m["hyperparameters"] = entry.hyperparameters;
        if (!entry.model.is_null()) {
            m["model"] = entry.model;
        }
        model_array.push_back(std::move(m));
    }
    doc["models"] = std::move(model_array);
    return doc;
}

std::string PredictionReport::to_json_text() const {
    return to_json().dump(2) + "\n";
}

PredictionReport PredictionReport::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("schema", "") != "cdri-report/1") {
        throw std::runtime_error("PredictionReport: missing or unsupported schema (want cdri-report/1)");
    }
    PredictionReport report;
    try {
        report.horizon_year = doc.at("horizon_year").get<int>();
        report.interval = doc.value("interval", 3);
        report.seed = doc.at("seed").get<std::uint64_t>();
        report.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
        report.lstm_loss = doc.at("lstm_loss").get<std::vector<double>>();
        const auto& model_array = doc.at("models");
        if (!model_array.is_array() || model_array.size() != kModelCount) {
            throw std::runtime_error("PredictionReport: expected exactly 6 model entries");
        }
        for (std::size_t m = 0; m < kModelCount; ++m) {
            const auto& entry = model_array[m];
            auto kind = model_from_key(entry.at("kind").get<std::string>());
            if (!kind || *kind != kModelKinds[m]) {
                throw std::runtime_error("PredictionReport: model entries out of canonical order");
            }
            report.models[m].kind = *kind;
            auto pred = entry.at("prediction").get<std::vector<double>>();
            auto clamp = entry.at("clamped").get<std::vector<bool>>();
            if (pred.size() != kDimensionCount || clamp.size() != kDimensionCount) {
                throw std::runtime_error("PredictionReport: prediction/clamped must carry 5 entries");
            }
            for (std::size_t d = 0; d < kDimensionCount; ++d) {
                report.models[m].prediction[d] = pred[d];
                report.models[m].clamped[d] = clamp[d];
            }
            report.models[m].hyperparameters = entry.value("hyperparameters", nlohmann::json::object());
            report.models[m].model = entry.value("model", nlohmann::json());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("PredictionReport: malformed document: ") + e.what());
    }
    return report;
}

PredictionReport PredictionReport::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("PredictionReport: invalid JSON: ") + e.what());
    }
    return from_json(doc);
}

} // namespace cdri
