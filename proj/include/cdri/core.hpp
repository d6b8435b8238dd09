#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdri {

/// The five resilience dimensions, in the canonical order used everywhere:
/// tables, vectors, SVG axes, serialized forms.
enum class Dimension : int {
    Physical = 0,
    Social = 1,
    Economic = 2,
    Organizational = 3,
    NaturalHealth = 4,
};

inline constexpr std::size_t kDimensionCount = 5;

inline constexpr std::array<Dimension, kDimensionCount> kDimensions = {
    Dimension::Physical,    Dimension::Social,        Dimension::Economic,
    Dimension::Organizational, Dimension::NaturalHealth,
};

/// Machine token, e.g. "natural_health". Used in CSV and JSON.
std::string_view dimension_token(Dimension d);

/// Display name, e.g. "Natural/Health". Used in tables and chart labels.
std::string_view dimension_display_name(Dimension d);

/// Case-insensitive token lookup; nullopt for unknown tokens.
std::optional<Dimension> dimension_from_token(std::string_view token);

/// One questionnaire parameter: id 1..5, score in [1,5], nonnegative weight.
/// Raw questionnaire entries are integers 1..5; aggregated inputs may carry
/// non-integer scores.
struct ParameterScore {
    int parameter_id = 0;
    double score = 0.0;
    double weight = 0.0;
};

/// One expert's weighted parameter scores for one dimension in one year.
/// Validation guarantees 5 parameters with distinct ids 1..5 and weights
/// summing to 1 within 1e-6.
struct AssessmentRecord {
    std::string expert_id;
    int year = 0;
    Dimension dimension = Dimension::Physical;
    std::array<ParameterScore, 5> parameters{};
};

enum class Provenance {
    ExpertLevel,
    Aggregate,
    Predicted,
};

/// One score per dimension (canonical order), each in [1,5].
struct ResilienceVector {
    std::array<double, kDimensionCount> scores{};
    int year = 0;
    Provenance provenance = Provenance::Aggregate;

    double operator[](Dimension d) const { return scores[static_cast<std::size_t>(d)]; }
    double& operator[](Dimension d) { return scores[static_cast<std::size_t>(d)]; }
};

inline constexpr double kWeightSumTolerance = 1e-6;

/// Weighted arithmetic mean of the 5 parameter scores, summed in ascending
/// parameter-id order (left-to-right, double accumulation) so results are
/// bit-reproducible. Throws std::invalid_argument on a wrong parameter count
/// or a weight sum off 1 by more than 1e-6.
double dimension_score(std::span<const ParameterScore> parameters);

/// Builds one expert's vector for one year from exactly one record per
/// dimension. Throws std::invalid_argument on a missing or duplicate dimension
/// or mixed (expert, year) keys.
ResilienceVector expert_vector(std::span<const AssessmentRecord> records);

/// Weighted mean of the 5 dimension scores (canonical order). Weights must sum
/// to 1 within 1e-6. Result lies in [1,5] for in-range inputs.
double overall_cdri(const ResilienceVector& vector, const std::array<double, kDimensionCount>& dim_weights);

inline constexpr std::array<double, kDimensionCount> kEqualDimensionWeights = {0.2, 0.2, 0.2, 0.2, 0.2};

/// Validated panel of assessment records.
///
/// Construction sorts records into canonical order (expert, year, dimension)
/// and enforces the record invariants: distinct parameter ids 1..5, scores in
/// [1,5], nonnegative weights summing to 1 within 1e-6, no duplicate
/// (expert, year, dimension), and every present (expert, year) pair covering
/// all five dimensions. Violations throw std::invalid_argument; lenient
/// handling of messy input (dropping incomplete pairs, renormalizing weights)
/// is the CSV ingest layer's job, which sanitizes before constructing.
class PanelDataset {
public:
    PanelDataset() = default;

    static PanelDataset from_records(std::vector<AssessmentRecord> records);

    const std::vector<AssessmentRecord>& records() const { return records_; }
    const std::vector<int>& years() const { return years_; }
    const std::vector<std::string>& experts() const { return experts_; }
    bool empty() const { return records_.empty(); }

    bool has_year(int year) const;

    /// Records for one (expert, year) pair, contiguous range in canonical order.
    std::span<const AssessmentRecord> pair_records(const std::string& expert_id, int year) const;

    /// True when the expert has a (complete) pair for the year.
    bool has_pair(const std::string& expert_id, int year) const;

private:
    std::vector<AssessmentRecord> records_; // canonical order
    std::vector<int> years_;                // ascending, distinct
    std::vector<std::string> experts_;      // ascending, distinct
};

/// Unweighted arithmetic mean of expert_vector across all experts present for
/// the year. Experts are visited in ascending id order, left-to-right
/// accumulation, so the result is independent of input record order, bitwise.
/// Throws std::invalid_argument when the year is absent.
ResilienceVector aggregate_experts(const PanelDataset& dataset, int year);

} // namespace cdri
