#pragma once

#include "cdri/core.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cdri {

/// Issue codes attached to ValidationReport entries.
namespace issue {
inline constexpr const char* kMalformedRow = "MALFORMED_ROW";
inline constexpr const char* kBadHeader = "BAD_HEADER";
inline constexpr const char* kUnknownDimension = "UNKNOWN_DIMENSION";
inline constexpr const char* kScoreOutOfRange = "SCORE_OUT_OF_RANGE";
inline constexpr const char* kNonIntegerScore = "NON_INTEGER_SCORE";
inline constexpr const char* kParameterOutOfRange = "PARAMETER_OUT_OF_RANGE";
inline constexpr const char* kNegativeWeight = "NEGATIVE_WEIGHT";
inline constexpr const char* kDuplicateParameter = "DUPLICATE_PARAMETER";
inline constexpr const char* kMissingParameter = "MISSING_PARAMETER";
inline constexpr const char* kWeightSumInvalid = "WEIGHT_SUM_INVALID";
inline constexpr const char* kWeightNormalized = "WEIGHT_NORMALIZED";
inline constexpr const char* kIncompletePair = "INCOMPLETE_PAIR_DROPPED";
} // namespace issue

struct ValidationIssue {
    std::size_t row = 0; // 1-based physical line number; header is line 1
    std::string code;
    std::string message;
};

/// Outcome of CSV validation. The dataset is accepted iff errors is empty;
/// warnings never reject.
struct ValidationReport {
    std::size_t record_count = 0;
    std::size_t expert_count = 0;
    std::vector<int> years;
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    bool accepted() const { return errors.empty(); }

    /// Human-readable summary: counts plus the first few issues per code.
    std::string summary() const;
};

struct ParseResult {
    PanelDataset dataset; // empty unless report.accepted()
    ValidationReport report;
};

/// Parses the assessment CSV schema
///   expert_id,year,dimension,parameter,score,weight
/// (header exactly as above; dimension tokens case-insensitive; rows in any
/// order; one row per parameter). Weight sums within 1e-6 of 1 are kept as-is;
/// raw sums in [0.5, 1.5] are renormalized with a warning; anything else is an
/// error. Incomplete (expert, year) pairs are dropped with a warning.
ParseResult parse_assessment_csv(std::istream& input);
ParseResult parse_assessment_csv(const std::string& text);

/// Inverse of parse: canonical record order, one row per parameter, shortest
/// round-trip number formatting. parse(serialize(ds)) == ds, field-exact.
std::string serialize_assessment_csv(const PanelDataset& dataset);

/// Dataset archive, schema "cdri-dataset/1": fields schema, years, experts,
/// records. save/load are exact inverses. load throws std::runtime_error on a
/// schema or structure violation.
std::string save_dataset_json(const PanelDataset& dataset,
                              std::optional<std::uint64_t> generator_seed = std::nullopt);
PanelDataset load_dataset_json(const std::string& text);

/// Forecast-ready time series built from a validated panel.
/// Row y of aggregate equals aggregate_experts(dataset, years[y]); expert rows
/// are nullopt where the expert has no pair for that year.
struct SeriesPanel {
    std::vector<int> years;   // ascending
    std::vector<double> t;    // (year - years[0]) / interval
    int interval = 3;
    std::vector<std::array<double, kDimensionCount>> aggregate;
    std::vector<std::string> experts;
    // expert index x year index
    std::vector<std::vector<std::optional<std::array<double, kDimensionCount>>>> expert_rows;
};

/// Builds the aggregate and expert-level matrices in year-ascending order.
/// Throws std::invalid_argument with fewer than 2 distinct years.
SeriesPanel build_series(const PanelDataset& dataset, int interval = 3);

struct SynthShock {
    int year = 0;
    std::array<bool, kDimensionCount> dimensions{};
    double magnitude = 0.0;
};

/// Deterministic synthetic panel configuration. Same seed, same dataset.
struct SynthConfig {
    int expert_count = 11;
    std::vector<int> years = {2013, 2016, 2019, 2022};
    std::array<double, kDimensionCount> base = {3.0, 3.0, 3.0, 3.0, 3.0};
    std::array<double, kDimensionCount> slope = {0.0, 0.0, 0.0, 0.0, 0.0};
    double noise_amplitude = 0.0;
    std::optional<SynthShock> shock;
    std::uint64_t seed = 42;
    int interval = 3;
};

/// Generates a complete panel: parameter score = base + slope*t + noise +
/// shock, clamped to [1,5]. Noise is uniform in [-amplitude, amplitude];
/// weights come from a seeded symmetric dyadic distribution (k_i/64 with
/// sum(k)=64), so weight sums are exactly 1. Every random draw is keyed by
/// (seed, expert, year, dimension), never by call order, so a given seed
/// always produces the identical dataset and the shock term never perturbs
/// unrelated draws.
PanelDataset generate_synthetic(const SynthConfig& config);

} // namespace cdri
