#include "cdri/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace cdri {

namespace {

constexpr std::array<std::string_view, kDimensionCount> kTokens = {
    "physical", "social", "economic", "organizational", "natural_health",
};

constexpr std::array<std::string_view, kDimensionCount> kDisplayNames = {
    "Physical", "Social", "Economic", "Organizational", "Natural/Health",
};

std::string lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::string_view dimension_token(Dimension d) {
    return kTokens[static_cast<std::size_t>(d)];
}

std::string_view dimension_display_name(Dimension d) {
    return kDisplayNames[static_cast<std::size_t>(d)];
}

std::optional<Dimension> dimension_from_token(std::string_view token) {
    std::string lowered = lower_copy(token);
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        if (lowered == kTokens[i]) {
            return kDimensions[i];
        }
    }
    return std::nullopt;
}

double dimension_score(std::span<const ParameterScore> parameters) {
    if (parameters.size() != 5) {
        throw std::invalid_argument("dimension_score: expected exactly 5 parameters, got " +
                                    std::to_string(parameters.size()));
    }
    std::array<const ParameterScore*, 5> ordered{};
    for (std::size_t i = 0; i < 5; ++i) {
        ordered[i] = &parameters[i];
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const ParameterScore* a, const ParameterScore* b) {
                  return a->parameter_id < b->parameter_id;
              });
    double weight_sum = 0.0;
    for (const ParameterScore* p : ordered) {
        weight_sum += p->weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        throw std::invalid_argument("dimension_score: weights sum to " + std::to_string(weight_sum) +
                                    ", expected 1 within 1e-6");
    }
    double score = 0.0;
    for (const ParameterScore* p : ordered) {
        score += p->weight * p->score;
    }
    return score;
}

ResilienceVector expert_vector(std::span<const AssessmentRecord> records) {
    if (records.size() != kDimensionCount) {
        throw std::invalid_argument("expert_vector: expected one record per dimension, got " +
                                    std::to_string(records.size()));
    }
    const std::string& expert = records[0].expert_id;
    int year = records[0].year;
    std::array<bool, kDimensionCount> seen{};
    ResilienceVector vec;
    vec.year = year;
    vec.provenance = Provenance::ExpertLevel;
    for (const AssessmentRecord& rec : records) {
        if (rec.expert_id != expert || rec.year != year) {
            throw std::invalid_argument("expert_vector: records span more than one (expert, year)");
        }
        auto idx = static_cast<std::size_t>(rec.dimension);
        if (seen[idx]) {
            throw std::invalid_argument("expert_vector: duplicate dimension " +
                                        std::string(dimension_token(rec.dimension)));
        }
        seen[idx] = true;
        vec.scores[idx] = dimension_score(rec.parameters);
    }
    return vec;
}

double overall_cdri(const ResilienceVector& vector, const std::array<double, kDimensionCount>& dim_weights) {
    double weight_sum = 0.0;
    for (double w : dim_weights) {
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        throw std::invalid_argument("overall_cdri: dimension weights sum to " +
                                    std::to_string(weight_sum) + ", expected 1 within 1e-6");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < kDimensionCount; ++i) {
        total += dim_weights[i] * vector.scores[i];
    }
    return total;
}

namespace {

bool canonical_less(const AssessmentRecord& a, const AssessmentRecord& b) {
    if (a.expert_id != b.expert_id) return a.expert_id < b.expert_id;
    if (a.year != b.year) return a.year < b.year;
    return static_cast<int>(a.dimension) < static_cast<int>(b.dimension);
}

void validate_record(const AssessmentRecord& rec) {
    if (rec.expert_id.empty()) {
        throw std::invalid_argument("PanelDataset: empty expert id");
    }
    if (rec.expert_id.find_first_of(",\r\n") != std::string::npos) {
        throw std::invalid_argument("PanelDataset: expert id '" + rec.expert_id +
                                    "' contains CSV-unsafe characters");
    }
    std::array<bool, 5> id_seen{};
    double weight_sum = 0.0;
    for (const ParameterScore& p : rec.parameters) {
        if (p.parameter_id < 1 || p.parameter_id > 5) {
            throw std::invalid_argument("PanelDataset: parameter id " + std::to_string(p.parameter_id) +
                                        " outside 1..5");
        }
        auto idx = static_cast<std::size_t>(p.parameter_id - 1);
        if (id_seen[idx]) {
            throw std::invalid_argument("PanelDataset: duplicate parameter id " +
                                        std::to_string(p.parameter_id));
        }
        id_seen[idx] = true;
        if (!(p.score >= 1.0 && p.score <= 5.0)) {
            throw std::invalid_argument("PanelDataset: score " + std::to_string(p.score) +
                                        " outside [1,5]");
        }
        if (!(p.weight >= 0.0)) {
            throw std::invalid_argument("PanelDataset: negative weight");
        }
        weight_sum += p.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        throw std::invalid_argument("PanelDataset: parameter weights for expert '" + rec.expert_id +
                                    "' year " + std::to_string(rec.year) + " sum to " +
                                    std::to_string(weight_sum));
    }
}

} // namespace

PanelDataset PanelDataset::from_records(std::vector<AssessmentRecord> records) {
    std::sort(records.begin(), records.end(), canonical_less);

    for (std::size_t i = 0; i < records.size(); ++i) {
        validate_record(records[i]);
        if (i > 0 && records[i - 1].expert_id == records[i].expert_id &&
            records[i - 1].year == records[i].year &&
            records[i - 1].dimension == records[i].dimension) {
            throw std::invalid_argument("PanelDataset: duplicate (expert, year, dimension) entry for '" +
                                        records[i].expert_id + "', year " +
                                        std::to_string(records[i].year));
        }
    }

    // Each present (expert, year) pair must cover all five dimensions.
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() && records[j].expert_id == records[i].expert_id &&
               records[j].year == records[i].year) {
            ++j;
        }
        if (j - i != kDimensionCount) {
            throw std::invalid_argument("PanelDataset: expert '" + records[i].expert_id + "', year " +
                                        std::to_string(records[i].year) + " covers " +
                                        std::to_string(j - i) + " of 5 dimensions");
        }
        i = j;
    }

    PanelDataset ds;
    ds.records_ = std::move(records);
    for (const AssessmentRecord& rec : ds.records_) {
        if (ds.years_.empty() || std::find(ds.years_.begin(), ds.years_.end(), rec.year) == ds.years_.end()) {
            ds.years_.push_back(rec.year);
        }
        if (ds.experts_.empty() || ds.experts_.back() != rec.expert_id) {
            if (std::find(ds.experts_.begin(), ds.experts_.end(), rec.expert_id) == ds.experts_.end()) {
                ds.experts_.push_back(rec.expert_id);
            }
        }
    }
    std::sort(ds.years_.begin(), ds.years_.end());
    std::sort(ds.experts_.begin(), ds.experts_.end());
    return ds;
}

bool PanelDataset::has_year(int year) const {
    return std::find(years_.begin(), years_.end(), year) != years_.end();
}

std::span<const AssessmentRecord> PanelDataset::pair_records(const std::string& expert_id, int year) const {
    auto lo = std::lower_bound(records_.begin(), records_.end(), std::pair(expert_id, year),
                               [](const AssessmentRecord& rec, const std::pair<std::string, int>& key) {
                                   if (rec.expert_id != key.first) return rec.expert_id < key.first;
                                   return rec.year < key.second;
                               });
    auto hi = lo;
    while (hi != records_.end() && hi->expert_id == expert_id && hi->year == year) {
        ++hi;
    }
    if (lo == hi) {
        return {};
    }
    return {&*lo, static_cast<std::size_t>(hi - lo)};
}

bool PanelDataset::has_pair(const std::string& expert_id, int year) const {
    return pair_records(expert_id, year).size() == kDimensionCount;
}

ResilienceVector aggregate_experts(const PanelDataset& dataset, int year) {
    if (!dataset.has_year(year)) {
        throw std::invalid_argument("aggregate_experts: year " + std::to_string(year) +
                                    " not present in dataset");
    }
    ResilienceVector mean;
    mean.year = year;
    mean.provenance = Provenance::Aggregate;
    std::size_t count = 0;
    for (const std::string& expert : dataset.experts()) {
        if (!dataset.has_pair(expert, year)) {
            continue;
        }
        ResilienceVector v = expert_vector(dataset.pair_records(expert, year));
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            mean.scores[d] += v.scores[d];
        }
        ++count;
    }
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        mean.scores[d] /= static_cast<double>(count);
    }
    return mean;
}

} // namespace cdri
