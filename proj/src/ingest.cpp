#include "cdri/ingest.hpp"

#include "cdri/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cdri {

namespace {

constexpr std::string_view kCsvHeader = "expert_id,year,dimension,parameter,score,weight";

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

std::optional<long> parse_int(const std::string& s) {
    long value = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return value;
}

std::optional<double> parse_double(const std::string& s) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return value;
}

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct RawCell {
    std::size_t row = 0;
    double score = 0.0;
    double weight = 0.0;
};

struct GroupKey {
    std::string expert;
    int year;
    Dimension dim;
    bool operator<(const GroupKey& o) const {
        if (expert != o.expert) return expert < o.expert;
        if (year != o.year) return year < o.year;
        return static_cast<int>(dim) < static_cast<int>(o.dim);
    }
};

} // namespace

std::string ValidationReport::summary() const {
    std::ostringstream out;
    out << (accepted() ? "accepted" : "rejected") << ": " << record_count << " record(s), "
        << expert_count << " expert(s), " << years.size() << " year(s)";
    if (!years.empty()) {
        out << " [";
        for (std::size_t i = 0; i < years.size(); ++i) {
            out << (i ? " " : "") << years[i];
        }
        out << "]";
    }
    out << "; " << errors.size() << " error(s), " << warnings.size() << " warning(s)\n";

    auto print_issues = [&out](const char* label, const std::vector<ValidationIssue>& issues) {
        std::map<std::string, std::size_t> counts;
        for (const auto& issue : issues) {
            counts[issue.code]++;
        }
        std::size_t shown = 0;
        for (const auto& issue : issues) {
            if (shown >= 10) {
                out << "  ... " << issues.size() - shown << " more " << label << "(s)\n";
                break;
            }
            out << "  " << label << " row " << issue.row << " [" << issue.code << "] "
                << issue.message << "\n";
            ++shown;
        }
        if (counts.size() > 1 || issues.size() > 10) {
            out << "  " << label << " totals:";
            for (const auto& [code, n] : counts) {
                out << " " << code << "=" << n;
            }
            out << "\n";
        }
    };
    print_issues("error", errors);
    print_issues("warning", warnings);
    return out.str();
}

ParseResult parse_assessment_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_assessment_csv(in);
}

ParseResult parse_assessment_csv(std::istream& input) {
    ParseResult result;
    ValidationReport& report = result.report;

    std::string line;
    std::size_t row = 0;

    if (!std::getline(input, line)) {
        report.errors.push_back({1, issue::kBadHeader, "empty input"});
        return result;
    }
    row = 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line) != kCsvHeader) {
        report.errors.push_back({1, issue::kBadHeader,
                                 "header must be exactly '" + std::string(kCsvHeader) + "'"});
        return result;
    }

    // parameter_id -> cell, per (expert, year, dimension)
    std::map<GroupKey, std::map<int, RawCell>> groups;

    while (std::getline(input, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 6) {
            report.errors.push_back({row, issue::kMalformedRow,
                                     "expected 6 fields, got " + std::to_string(fields.size())});
            continue;
        }
        const std::string& expert = fields[0];
        if (expert.empty()) {
            report.errors.push_back({row, issue::kMalformedRow, "empty expert_id"});
            continue;
        }
        auto year = parse_int(fields[1]);
        if (!year) {
            report.errors.push_back({row, issue::kMalformedRow, "unparsable year '" + fields[1] + "'"});
            continue;
        }
        auto dim = dimension_from_token(fields[2]);
        if (!dim) {
            report.errors.push_back({row, issue::kUnknownDimension,
                                     "unknown dimension token '" + fields[2] + "'"});
            continue;
        }
        auto param = parse_int(fields[3]);
        if (!param) {
            report.errors.push_back({row, issue::kMalformedRow,
                                     "unparsable parameter '" + fields[3] + "'"});
            continue;
        }
        if (*param < 1 || *param > 5) {
            report.errors.push_back({row, issue::kParameterOutOfRange,
                                     "parameter " + std::to_string(*param) + " outside 1..5"});
            continue;
        }
        auto score = parse_double(fields[4]);
        if (!score || !std::isfinite(*score)) {
            report.errors.push_back({row, issue::kMalformedRow, "unparsable score '" + fields[4] + "'"});
            continue;
        }
        if (*score < 1.0 || *score > 5.0) {
            report.errors.push_back({row, issue::kScoreOutOfRange,
                                     "score " + format_double(*score) + " outside [1,5]"});
            continue;
        }
        if (*score != std::floor(*score)) {
            report.warnings.push_back({row, issue::kNonIntegerScore,
                                       "score " + format_double(*score) +
                                           " is not an integer (aggregated input assumed)"});
        }
        auto weight = parse_double(fields[5]);
        if (!weight || !std::isfinite(*weight)) {
            report.errors.push_back({row, issue::kMalformedRow, "unparsable weight '" + fields[5] + "'"});
            continue;
        }
        if (*weight < 0.0) {
            report.errors.push_back({row, issue::kNegativeWeight,
                                     "weight " + format_double(*weight) + " is negative"});
            continue;
        }

        GroupKey key{expert, static_cast<int>(*year), *dim};
        auto& group = groups[key];
        auto [it, inserted] = group.emplace(static_cast<int>(*param),
                                            RawCell{row, *score, *weight});
        if (!inserted) {
            report.errors.push_back({row, issue::kDuplicateParameter,
                                     "duplicate parameter " + std::to_string(*param) + " for (" +
                                         expert + ", " + std::to_string(*year) + ", " +
                                         std::string(dimension_token(*dim)) + "); first at row " +
                                         std::to_string(it->second.row)});
        }
    }

    // Assemble records; weight handling per group.
    struct PendingPair {
        std::size_t first_row = 0;
        std::vector<AssessmentRecord> records;
    };
    std::map<std::pair<std::string, int>, PendingPair> pairs;
    for (auto& [key, group] : groups) {
        if (group.size() != 5) {
            std::string missing;
            for (int id = 1; id <= 5; ++id) {
                if (!group.count(id)) {
                    missing += (missing.empty() ? "" : ",") + std::to_string(id);
                }
            }
            report.errors.push_back({group.begin()->second.row, issue::kMissingParameter,
                                     "(" + key.expert + ", " + std::to_string(key.year) + ", " +
                                         std::string(dimension_token(key.dim)) +
                                         ") missing parameter(s) " + missing});
            continue;
        }
        double weight_sum = 0.0;
        for (const auto& [id, cell] : group) {
            weight_sum += cell.weight;
        }
        bool normalize = false;
        if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
            if (weight_sum >= 0.5 && weight_sum <= 1.5) {
                normalize = true;
                report.warnings.push_back({group.begin()->second.row, issue::kWeightNormalized,
                                           "(" + key.expert + ", " + std::to_string(key.year) + ", " +
                                               std::string(dimension_token(key.dim)) +
                                               ") weights sum to " + format_double(weight_sum) +
                                               "; normalized to 1"});
            } else {
                report.errors.push_back({group.begin()->second.row, issue::kWeightSumInvalid,
                                         "(" + key.expert + ", " + std::to_string(key.year) + ", " +
                                             std::string(dimension_token(key.dim)) +
                                             ") weights sum to " + format_double(weight_sum) +
                                             ", outside [0.5, 1.5]"});
                continue;
            }
        }
        AssessmentRecord rec;
        rec.expert_id = key.expert;
        rec.year = key.year;
        rec.dimension = key.dim;
        std::size_t slot = 0;
        for (const auto& [id, cell] : group) {
            double w = normalize ? cell.weight / weight_sum : cell.weight;
            rec.parameters[slot++] = ParameterScore{id, cell.score, w};
        }
        auto& pair = pairs[{key.expert, key.year}];
        pair.first_row = pair.records.empty() ? group.begin()->second.row
                                              : std::min(pair.first_row, group.begin()->second.row);
        pair.records.push_back(std::move(rec));
    }

    std::vector<AssessmentRecord> records;
    for (auto& [pair_key, pair] : pairs) {
        if (pair.records.size() != kDimensionCount) {
            std::string have;
            for (const auto& r : pair.records) {
                have += (have.empty() ? "" : ",") + std::string(dimension_token(r.dimension));
            }
            report.warnings.push_back({pair.first_row, issue::kIncompletePair,
                                       "(" + pair_key.first + ", " + std::to_string(pair_key.second) +
                                           ") covers only [" + have + "]; pair dropped"});
            continue;
        }
        for (auto& r : pair.records) {
            records.push_back(std::move(r));
        }
    }

    if (!report.accepted()) {
        return result;
    }

    result.dataset = PanelDataset::from_records(std::move(records));
    report.record_count = result.dataset.records().size();
    report.expert_count = result.dataset.experts().size();
    report.years = result.dataset.years();
    return result;
}

std::string serialize_assessment_csv(const PanelDataset& dataset) {
    std::string out(kCsvHeader);
    out += "\n";
    for (const AssessmentRecord& rec : dataset.records()) {
        std::array<const ParameterScore*, 5> ordered{};
        for (std::size_t i = 0; i < 5; ++i) ordered[i] = &rec.parameters[i];
        std::sort(ordered.begin(), ordered.end(),
                  [](const ParameterScore* a, const ParameterScore* b) {
                      return a->parameter_id < b->parameter_id;
                  });
        for (const ParameterScore* p : ordered) {
            out += rec.expert_id;
            out += ',';
            out += std::to_string(rec.year);
            out += ',';
            out += std::string(dimension_token(rec.dimension));
            out += ',';
            out += std::to_string(p->parameter_id);
            out += ',';
            out += format_double(p->score);
            out += ',';
            out += format_double(p->weight);
            out += '\n';
        }
    }
    return out;
}

std::string save_dataset_json(const PanelDataset& dataset, std::optional<std::uint64_t> generator_seed) {
    nlohmann::json doc;
    doc["schema"] = "cdri-dataset/1";
    doc["years"] = dataset.years();
    doc["experts"] = dataset.experts();
    nlohmann::json records = nlohmann::json::array();
    for (const AssessmentRecord& rec : dataset.records()) {
        nlohmann::json r;
        r["expert_id"] = rec.expert_id;
        r["year"] = rec.year;
        r["dimension"] = std::string(dimension_token(rec.dimension));
        nlohmann::json params = nlohmann::json::array();
        for (const ParameterScore& p : rec.parameters) {
            params.push_back({{"parameter", p.parameter_id}, {"score", p.score}, {"weight", p.weight}});
        }
        r["parameters"] = std::move(params);
        records.push_back(std::move(r));
    }
    doc["records"] = std::move(records);
    if (generator_seed) {
        doc["generator_seed"] = *generator_seed;
    }
    return doc.dump(2) + "\n";
}

PanelDataset load_dataset_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("load_dataset_json: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "cdri-dataset/1") {
        throw std::runtime_error("load_dataset_json: missing or unsupported schema (want cdri-dataset/1)");
    }
    if (!doc.contains("records") || !doc["records"].is_array()) {
        throw std::runtime_error("load_dataset_json: missing records array");
    }
    std::vector<AssessmentRecord> records;
    try {
        for (const auto& r : doc["records"]) {
            AssessmentRecord rec;
            rec.expert_id = r.at("expert_id").get<std::string>();
            rec.year = r.at("year").get<int>();
            auto dim = dimension_from_token(r.at("dimension").get<std::string>());
            if (!dim) {
                throw std::runtime_error("unknown dimension token '" +
                                         r.at("dimension").get<std::string>() + "'");
            }
            rec.dimension = *dim;
            const auto& params = r.at("parameters");
            if (!params.is_array() || params.size() != 5) {
                throw std::runtime_error("record must carry exactly 5 parameters");
            }
            for (std::size_t i = 0; i < 5; ++i) {
                rec.parameters[i] = ParameterScore{params[i].at("parameter").get<int>(),
                                                   params[i].at("score").get<double>(),
                                                   params[i].at("weight").get<double>()};
            }
            records.push_back(std::move(rec));
        }
        return PanelDataset::from_records(std::move(records));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("load_dataset_json: malformed record: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("load_dataset_json: ") + e.what());
    }
}

SeriesPanel build_series(const PanelDataset& dataset, int interval) {
    if (dataset.years().size() < 2) {
        throw std::invalid_argument("build_series: need at least 2 distinct years, got " +
                                    std::to_string(dataset.years().size()));
    }
    if (interval <= 0) {
        throw std::invalid_argument("build_series: interval must be positive");
    }
    SeriesPanel panel;
    panel.years = dataset.years();
    panel.interval = interval;
    panel.experts = dataset.experts();
    int first = panel.years.front();
    for (int y : panel.years) {
        panel.t.push_back(static_cast<double>(y - first) / static_cast<double>(interval));
        panel.aggregate.push_back(aggregate_experts(dataset, y).scores);
    }
    panel.expert_rows.resize(panel.experts.size());
    for (std::size_t e = 0; e < panel.experts.size(); ++e) {
        panel.expert_rows[e].resize(panel.years.size());
        for (std::size_t y = 0; y < panel.years.size(); ++y) {
            if (dataset.has_pair(panel.experts[e], panel.years[y])) {
                panel.expert_rows[e][y] =
                    expert_vector(dataset.pair_records(panel.experts[e], panel.years[y])).scores;
            }
        }
    }
    return panel;
}

namespace {

// Draw streams for synthetic generation; values, not call order, key every draw.
enum SynthStream : std::uint64_t {
    kStreamWeights = 1,
    kStreamNoise = 2,
};

std::string synth_expert_id(int index, int expert_count) {
    int width = 2;
    for (int n = expert_count; n >= 100 && width < 9; n /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "E%0*d", width, index + 1);
    return buf;
}

} // namespace

PanelDataset generate_synthetic(const SynthConfig& config) {
    if (config.expert_count < 1) {
        throw std::invalid_argument("generate_synthetic: expert count must be >= 1");
    }
    if (config.years.empty()) {
        throw std::invalid_argument("generate_synthetic: year list is empty");
    }
    if (config.interval <= 0) {
        throw std::invalid_argument("generate_synthetic: interval must be positive");
    }
    std::vector<int> years = config.years;
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());

    int first = years.front();
    std::vector<AssessmentRecord> records;
    records.reserve(static_cast<std::size_t>(config.expert_count) * years.size() * kDimensionCount);

    for (int e = 0; e < config.expert_count; ++e) {
        std::string expert = synth_expert_id(e, config.expert_count);
        for (int year : years) {
            double t = static_cast<double>(year - first) / static_cast<double>(config.interval);
            for (Dimension dim : kDimensions) {
                auto d = static_cast<std::size_t>(dim);
                auto key = [&](std::uint64_t stream) {
                    return mix_seed(config.seed,
                                    {stream, static_cast<std::uint64_t>(e),
                                     static_cast<std::uint64_t>(year), static_cast<std::uint64_t>(d)});
                };

                // Dyadic weights: k_i/64 with sum(k) = 64, so the FP sum is exactly 1.
                Pcg32 wrng(key(kStreamWeights));
                std::array<int, 5> units = {8, 8, 8, 8, 8};
                for (int extra = 0; extra < 24; ++extra) {
                    units[wrng.bounded(5)] += 1;
                }

                Pcg32 nrng(key(kStreamNoise));
                double shock_term = 0.0;
                if (config.shock && config.shock->year == year && config.shock->dimensions[d]) {
                    shock_term = config.shock->magnitude;
                }

                AssessmentRecord rec;
                rec.expert_id = expert;
                rec.year = year;
                rec.dimension = dim;
                for (int p = 0; p < 5; ++p) {
                    double noise = config.noise_amplitude * nrng.uniform(-1.0, 1.0);
                    double score = config.base[d] + config.slope[d] * t + noise + shock_term;
                    score = std::min(5.0, std::max(1.0, score));
                    rec.parameters[static_cast<std::size_t>(p)] =
                        ParameterScore{p + 1, score, static_cast<double>(units[static_cast<std::size_t>(p)]) / 64.0};
                }
                records.push_back(std::move(rec));
            }
        }
    }
    return PanelDataset::from_records(std::move(records));
}

} // namespace cdri
