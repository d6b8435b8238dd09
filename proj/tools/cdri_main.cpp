#include "cdri/core.hpp"
#include "cdri/ingest.hpp"
#include "cdri/pipeline.hpp"
#include "cdri/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write to a sibling temp file, then rename; failed runs leave no partial output.
void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out.flush()) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

cdri::ForecastConfig config_from_overrides(const std::vector<std::string>& overrides) {
    cdri::ForecastConfig config;
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("--set expects key=value, got '" + kv + "'");
        }
        try {
            cdri::set_config_key(config, kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return config;
}

std::array<bool, cdri::kModelCount> model_filter(const std::vector<std::string>& names) {
    std::array<bool, cdri::kModelCount> keep{};
    if (names.empty()) {
        keep.fill(true);
        return keep;
    }
    for (const std::string& name : names) {
        auto kind = cdri::model_from_key(name);
        if (!kind) {
            throw UsageError("unknown model key '" + name + "' (use linear_regression, decision_tree, "
                             "random_forest, gradient_boosting, var, lstm)");
        }
        keep[static_cast<std::size_t>(*kind)] = true;
    }
    return keep;
}

std::string filtered_table(const cdri::PredictionReport& report,
                           const std::array<bool, cdri::kModelCount>& keep) {
    std::string full = cdri::render_table(report, cdri::TableFormat::Markdown);
    std::istringstream in(full);
    std::string line;
    std::string out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (row < 2) {
            out += line + "\n"; // header + separator
        } else if (row - 2 < cdri::kModelCount && keep[row - 2]) {
            out += line + "\n";
        }
        ++row;
    }
    return out;
}

std::string fmt5(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.5f", v);
    return buf;
}

cdri::SynthShock parse_shock(const std::string& text) {
    // YEAR:dim+dim:MAGNITUDE, e.g. 2019:economic+natural_health:-1.0
    auto first = text.find(':');
    auto last = text.rfind(':');
    if (first == std::string::npos || last == first) {
        throw UsageError("--shock expects YEAR:dim+dim:MAGNITUDE, got '" + text + "'");
    }
    cdri::SynthShock shock;
    try {
        shock.year = std::stoi(text.substr(0, first));
        shock.magnitude = std::stod(text.substr(last + 1));
    } catch (const std::exception&) {
        throw UsageError("--shock: unparsable year or magnitude in '" + text + "'");
    }
    std::string dims = text.substr(first + 1, last - first - 1);
    std::size_t start = 0;
    while (start <= dims.size()) {
        auto plus = dims.find('+', start);
        std::string token = dims.substr(start, plus == std::string::npos ? plus : plus - start);
        auto dim = cdri::dimension_from_token(token);
        if (!dim) {
            throw UsageError("--shock: unknown dimension token '" + token + "'");
        }
        shock.dimensions[static_cast<std::size_t>(*dim)] = true;
        if (plus == std::string::npos) {
            break;
        }
        start = plus + 1;
    }
    return shock;
}

std::array<double, cdri::kDimensionCount> spread_values(const std::vector<double>& values,
                                                        const char* flag) {
    std::array<double, cdri::kDimensionCount> out{};
    if (values.size() == 1) {
        out.fill(values[0]);
    } else if (values.size() == cdri::kDimensionCount) {
        std::copy(values.begin(), values.end(), out.begin());
    } else {
        throw UsageError(std::string(flag) + " expects 1 or 5 values");
    }
    return out;
}

int cmd_ingest(const std::string& input, const std::string& out) {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read '" << input << "'\n";
        return kExitDataError;
    }
    cdri::ParseResult result = cdri::parse_assessment_csv(in);
    std::cout << result.report.summary();
    if (!result.report.accepted()) {
        std::cerr << "error: validation failed; no dataset written\n";
        return kExitDataError;
    }
    atomic_write(out, cdri::save_dataset_json(result.dataset));
    std::cerr << "[cdri] wrote dataset '" << out << "' fingerprint "
              << cdri::dataset_fingerprint(result.dataset) << "\n";
    return kExitOk;
}

int cmd_synth(const cdri::SynthConfig& config, const std::string& out) {
    cdri::PanelDataset dataset = cdri::generate_synthetic(config);
    atomic_write(out, cdri::serialize_assessment_csv(dataset));
    std::cerr << "[cdri] wrote " << dataset.records().size() * 5 << " data rows to '" << out
              << "' (seed " << config.seed << ")\n";
    return kExitOk;
}

int cmd_forecast(const std::string& dataset_path, int horizon, std::uint64_t seed,
                 const cdri::ForecastConfig& config, const std::string& out,
                 const std::array<bool, cdri::kModelCount>& keep) {
    cdri::PanelDataset dataset = cdri::load_dataset_json(read_file(dataset_path));
    cdri::PredictionReport report = cdri::run_forecast(dataset, horizon, config, seed);
    if (!out.empty()) {
        atomic_write(out, report.to_json_text());
        std::cerr << "[cdri] wrote report '" << out << "'\n";
    }
    std::cout << filtered_table(report, keep);
    return kExitOk;
}

int cmd_backtest(const std::string& dataset_path, std::uint64_t seed,
                 const cdri::ForecastConfig& config, const std::string& out,
                 const std::array<bool, cdri::kModelCount>& keep) {
    cdri::PanelDataset dataset = cdri::load_dataset_json(read_file(dataset_path));
    auto entries = cdri::backtest(dataset, config, seed);

    std::string table = "| Model |";
    for (cdri::Dimension d : cdri::kDimensions) {
        table += " " + std::string(cdri::dimension_display_name(d)) + " |";
    }
    table += " MAE |\n|---|---|---|---|---|---|---|\n";
    for (std::size_t m = 0; m < cdri::kModelCount; ++m) {
        if (!keep[m]) {
            continue;
        }
        table += "| " + std::string(cdri::model_display_name(entries[m].kind)) + " |";
        for (double err : entries[m].abs_error) {
            table += " " + fmt5(err) + " |";
        }
        table += " " + fmt5(entries[m].mean_abs_error) + " |\n";
    }
    std::cout << table;

    if (!out.empty()) {
        nlohmann::json doc;
        doc["schema"] = "cdri-backtest/1";
        doc["held_out_year"] = dataset.years().back();
        doc["seed"] = seed;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& entry : entries) {
            arr.push_back({{"kind", std::string(cdri::model_key(entry.kind))},
                           {"predicted", entry.predicted},
                           {"actual", entry.actual},
                           {"abs_error", entry.abs_error},
                           {"mae", entry.mean_abs_error}});
        }
        doc["models"] = std::move(arr);
        atomic_write(out, doc.dump(2) + "\n");
        std::cerr << "[cdri] wrote backtest '" << out << "'\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& predictions_path, const std::string& out_dir,
               const std::vector<std::string>& formats, const std::string& dataset_path) {
    cdri::PredictionReport report = cdri::PredictionReport::from_json_text(read_file(predictions_path));
    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    // Compute everything first; write only when all rendering succeeded.
    std::vector<std::pair<fs::path, std::string>> artifacts;
    for (const std::string& format : formats) {
        if (format == "md") {
            artifacts.emplace_back(dir / "table.md",
                                   cdri::render_table(report, cdri::TableFormat::Markdown));
        } else if (format == "csv") {
            artifacts.emplace_back(dir / "table.csv",
                                   cdri::render_table(report, cdri::TableFormat::Csv));
        } else {
            throw UsageError("--format must be md or csv, got '" + format + "'");
        }
    }
    artifacts.emplace_back(dir / "grouped_bars.svg", cdri::render_grouped_bars(report).xml);
    if (!report.lstm_loss.empty()) {
        artifacts.emplace_back(dir / "loss_curve.svg", cdri::render_loss_curve(report.lstm_loss).xml);
    } else {
        std::cerr << "[cdri] report carries no LSTM loss history; skipping loss_curve.svg\n";
    }

    if (!dataset_path.empty()) {
        cdri::PanelDataset dataset = cdri::load_dataset_json(read_file(dataset_path));
        std::vector<cdri::LabeledVector> overlay;
        for (int year : dataset.years()) {
            cdri::ResilienceVector vec = cdri::aggregate_experts(dataset, year);
            cdri::LabeledVector lv{std::to_string(year), vec};
            artifacts.emplace_back(dir / ("spider_" + std::to_string(year) + ".svg"),
                                   cdri::render_spider({lv}).xml);
            if (overlay.size() < 8) {
                overlay.push_back(std::move(lv));
            }
        }
        artifacts.emplace_back(dir / "spider_overlay.svg", cdri::render_spider(overlay).xml);
    }

    for (const auto& [path, content] : artifacts) {
        atomic_write(path, content);
        std::cerr << "[cdri] wrote '" << path.string() << "'\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal CDRI toolkit: panel ingestion, six-model resilience forecasting, "
                 "and report rendering"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate an assessment CSV and write a dataset archive");
    std::string ingest_input, ingest_out;
    ingest->add_option("--input", ingest_input, "assessment CSV path")->required();
    ingest->add_option("--out", ingest_out, "output dataset JSON path")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic panel CSV");
    std::string synth_out, shock_text;
    cdri::SynthConfig synth_config;
    std::vector<double> base_values{3.0};
    std::vector<double> slope_values{0.0};
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->add_option("--experts", synth_config.expert_count, "expert count (default 11)");
    synth->add_option("--years", synth_config.years, "comma-separated year list")->delimiter(',');
    synth->add_option("--seed", synth_config.seed, "generator seed (default 42)");
    synth->add_option("--base", base_values, "base score, 1 or 5 values")->delimiter(',');
    synth->add_option("--slope", slope_values, "per-step trend slope, 1 or 5 values")->delimiter(',');
    synth->add_option("--noise", synth_config.noise_amplitude, "uniform noise amplitude");
    synth->add_option("--shock", shock_text, "shock as YEAR:dim+dim:MAGNITUDE");
    synth->add_option("--interval", synth_config.interval, "years per time step (default 3)");

    // forecast
    auto* forecast = app.add_subcommand("forecast", "Fit all six models and predict a horizon year");
    std::string fc_dataset, fc_out;
    int fc_horizon = 0;
    std::uint64_t fc_seed = 42;
    std::vector<std::string> fc_set, fc_models;
    forecast->add_option("--dataset", fc_dataset, "dataset JSON path")->required();
    forecast->add_option("--horizon", fc_horizon, "horizon year")->required();
    forecast->add_option("--seed", fc_seed, "master seed (default 42)");
    forecast->add_option("--out", fc_out, "output report JSON path");
    forecast->add_option("--set", fc_set, "hyperparameter override key=value")->take_all();
    forecast->add_option("--models", fc_models, "restrict printed table to these model keys")
        ->delimiter(',');

    // backtest
    auto* backtest_cmd = app.add_subcommand("backtest", "Hold out the last year and score each model");
    std::string bt_dataset, bt_out;
    std::uint64_t bt_seed = 42;
    std::vector<std::string> bt_set, bt_models;
    backtest_cmd->add_option("--dataset", bt_dataset, "dataset JSON path")->required();
    backtest_cmd->add_option("--seed", bt_seed, "master seed (default 42)");
    backtest_cmd->add_option("--out", bt_out, "output backtest JSON path");
    backtest_cmd->add_option("--set", bt_set, "hyperparameter override key=value")->take_all();
    backtest_cmd->add_option("--models", bt_models, "restrict printed table to these model keys")
        ->delimiter(',');

    // report
    auto* report_cmd = app.add_subcommand("report", "Render tables and SVG charts from a report JSON");
    std::string rp_predictions, rp_out = ".", rp_dataset;
    std::vector<std::string> rp_formats{"md"};
    report_cmd->add_option("--predictions", rp_predictions, "report JSON path")->required();
    report_cmd->add_option("--out", rp_out, "output directory (default .)");
    report_cmd->add_option("--format", rp_formats, "table format(s): md, csv")->delimiter(',');
    report_cmd->add_option("--dataset", rp_dataset, "dataset JSON for spider diagrams");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints usage, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return kExitUsageError;
    }

    try {
        if (app.got_subcommand(ingest)) {
            std::cerr << "[cdri] ingest input=" << ingest_input << " out=" << ingest_out << "\n";
            return cmd_ingest(ingest_input, ingest_out);
        }
        if (app.got_subcommand(synth)) {
            synth_config.base = spread_values(base_values, "--base");
            synth_config.slope = spread_values(slope_values, "--slope");
            if (!shock_text.empty()) {
                synth_config.shock = parse_shock(shock_text);
            }
            std::cerr << "[cdri] synth out=" << synth_out << " experts=" << synth_config.expert_count
                      << " years=" << synth_config.years.size() << " seed=" << synth_config.seed
                      << " noise=" << synth_config.noise_amplitude << "\n";
            return cmd_synth(synth_config, synth_out);
        }
        if (app.got_subcommand(forecast)) {
            cdri::ForecastConfig config = config_from_overrides(fc_set);
            auto keep = model_filter(fc_models);
            std::cerr << "[cdri] forecast dataset=" << fc_dataset << " horizon=" << fc_horizon
                      << " seed=" << fc_seed << " " << cdri::describe_config(config) << "\n";
            return cmd_forecast(fc_dataset, fc_horizon, fc_seed, config, fc_out, keep);
        }
        if (app.got_subcommand(backtest_cmd)) {
            cdri::ForecastConfig config = config_from_overrides(bt_set);
            auto keep = model_filter(bt_models);
            std::cerr << "[cdri] backtest dataset=" << bt_dataset << " seed=" << bt_seed << " "
                      << cdri::describe_config(config) << "\n";
            return cmd_backtest(bt_dataset, bt_seed, config, bt_out, keep);
        }
        if (app.got_subcommand(report_cmd)) {
            std::cerr << "[cdri] report predictions=" << rp_predictions << " out=" << rp_out << "\n";
            return cmd_report(rp_predictions, rp_out, rp_formats, rp_dataset);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitUsageError;
}
