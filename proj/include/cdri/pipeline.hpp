#pragma once

#include "cdri/core.hpp"
#include "cdri/ingest.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cdri {

/// The six forecasters, in the comparison-table row order used everywhere.
enum class ModelKind : int {
    LinearRegression = 0,
    DecisionTree = 1,
    RandomForest = 2,
    GradientBoosting = 3,
    Var = 4,
    Lstm = 5,
};

inline constexpr std::size_t kModelCount = 6;

inline constexpr std::array<ModelKind, kModelCount> kModelKinds = {
    ModelKind::LinearRegression, ModelKind::DecisionTree,     ModelKind::RandomForest,
    ModelKind::GradientBoosting, ModelKind::Var,              ModelKind::Lstm,
};

std::string_view model_display_name(ModelKind kind); // "Linear Regression", ...
std::string_view model_key(ModelKind kind);          // "linear_regression", ...
std::optional<ModelKind> model_from_key(std::string_view key);

/// All tunables for one forecasting run. Module defaults are sized for
/// desk-scale panels (a handful of years, around a dozen experts).
struct ForecastConfig {
    int interval = 3;

    double var_lambda = 0.5;

    int tree_max_depth = 3;
    int tree_min_samples_leaf = 2;

    int forest_trees = 100;
    bool forest_bootstrap = true;

    int boost_stages = 50;
    double boost_learning_rate = 0.1;
    int boost_max_depth = 2;

    int lstm_hidden = 8;
    int lstm_epochs = 500;
    double lstm_step = 0.05;
};

/// Applies one `key=value` style override. Throws std::invalid_argument on an
/// unknown key or an out-of-domain value (callers treat both as usage errors).
void set_config_key(ForecastConfig& config, const std::string& key, const std::string& value);

/// One line of key=value pairs, for run logging.
std::string describe_config(const ForecastConfig& config);

struct ModelPrediction {
    ModelKind kind = ModelKind::LinearRegression;
    std::array<double, kDimensionCount> prediction{}; // clamped into [1,5]
    std::array<bool, kDimensionCount> clamped{};      // true iff raw output fell outside
    nlohmann::json hyperparameters;
    nlohmann::json model; // full coefficient / node disclosure
};

/// Forecast outcome, schema "cdri-report/1". Deterministic per
/// (dataset, config, seed); to_json_text is byte-stable.
struct PredictionReport {
    int horizon_year = 0;
    int interval = 3;
    std::array<ModelPrediction, kModelCount> models{};
    std::vector<double> lstm_loss;
    std::uint64_t seed = 0;
    std::string dataset_fingerprint;

    nlohmann::json to_json() const;
    std::string to_json_text() const;
    static PredictionReport from_json(const nlohmann::json& doc);
    static PredictionReport from_json_text(const std::string& text);
};

/// Content hash of a dataset (FNV-1a 64 over the canonical record encoding);
/// any single-field change changes the value.
std::string dataset_fingerprint(const PanelDataset& dataset);

/// The full temporal workflow: series, six fits, horizon prediction, clamping.
/// Horizon must lie ahead of the data by a whole number of intervals. Model
/// sub-seeds derive from the master seed per model kind, so results never
/// depend on fit order.
PredictionReport run_forecast(const PanelDataset& dataset, int horizon_year,
                              const ForecastConfig& config, std::uint64_t seed);

struct BacktestEntry {
    ModelKind kind = ModelKind::LinearRegression;
    std::array<double, kDimensionCount> predicted{};
    std::array<double, kDimensionCount> actual{};
    std::array<double, kDimensionCount> abs_error{};
    double mean_abs_error = 0.0;
};

/// Trains on all years but the last, predicts the held-out year, and reports
/// absolute errors against the actual aggregate vector. Needs >= 3 years.
std::array<BacktestEntry, kModelCount> backtest(const PanelDataset& dataset,
                                                const ForecastConfig& config, std::uint64_t seed);

} // namespace cdri
