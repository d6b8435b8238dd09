// Writes the golden rendering fixtures under tests/golden/.
// Run manually after an intentional rendering change:
//   ./build/tests/golden_gen tests/golden

#include "cdri/report.hpp"

#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: golden_gen <output-dir>\n";
        return 2;
    }
    std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);

    cdri::PredictionReport report = testutil::table2_report();

    cdri::ResilienceVector sample;
    sample.scores = {4, 3, 2, 3, 4};
    sample.year = 2013;

    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out << content;
        std::cout << "wrote " << (dir / name).string() << "\n";
    };

    write("table.md", cdri::render_table(report, cdri::TableFormat::Markdown));
    write("table.csv", cdri::render_table(report, cdri::TableFormat::Csv));
    write("spider.svg", cdri::render_spider({{"2013", sample}}).xml);
    write("loss_curve.svg", cdri::render_loss_curve(report.lstm_loss).xml);
    write("grouped_bars.svg", cdri::render_grouped_bars(report).xml);
    return 0;
}
