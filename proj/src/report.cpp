#include "cdri/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cdri {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Shared qualitative palette; spiders and bars key colors the same way.
constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt5(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.5f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_xml(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string svg_open(int width, int height) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
    return s;
}

void add_text(std::string& svg, double x, double y, const std::string& cls,
              const std::string& anchor, std::string_view text, const char* extra = "") {
    svg += "  <text class=\"" + cls + "\" x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
           "\" text-anchor=\"" + anchor + "\" font-family=\"sans-serif\" font-size=\"12\"" + extra +
           ">" + escape_xml(text) + "</text>\n";
}

void add_line(std::string& svg, const std::string& cls, double x1, double y1, double x2, double y2,
              const char* stroke = "#888888") {
    svg += "  <line class=\"" + cls + "\" x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" +
           fmt(x2) + "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke + "\"/>\n";
}

} // namespace

SvgDocument render_spider(const std::vector<LabeledVector>& vectors) {
    if (vectors.empty() || vectors.size() > 8) {
        throw std::invalid_argument("render_spider: expected 1..8 vectors, got " +
                                    std::to_string(vectors.size()));
    }
    for (const LabeledVector& lv : vectors) {
        for (double v : lv.vector.scores) {
            if (v < 1.0 - 1e-9 || v > 5.0 + 1e-9) {
                throw std::invalid_argument("render_spider: component " + std::to_string(v) +
                                            " outside [1,5]");
            }
        }
    }

    const int width = 600;
    const int height = 600;
    const double cx = 300.0;
    const double cy = 300.0;
    const double outer = 240.0;

    auto angle = [](std::size_t d) { return -kPi / 2.0 + 2.0 * kPi * static_cast<double>(d) / 5.0; };
    auto radius = [outer](double score) {
        double clamped = std::min(5.0, std::max(1.0, score));
        return (clamped - 1.0) / 4.0 * outer;
    };

    SvgDocument doc;
    doc.width = width;
    doc.height = height;
    std::string& svg = doc.xml;
    svg = svg_open(width, height);

    // Grid rings at scores 2..5 (score 1 is the center point).
    for (int s = 2; s <= 5; ++s) {
        svg += "  <circle class=\"ring\" cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" +
               fmt(radius(s)) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
        doc.inventory.rings++;
    }

    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        double a = angle(d);
        add_line(svg, "axis", cx, cy, cx + outer * std::cos(a), cy + outer * std::sin(a));
        doc.inventory.axes++;
    }
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        double a = angle(d);
        double lx = cx + (outer + 24.0) * std::cos(a);
        double ly = cy + (outer + 24.0) * std::sin(a) + 4.0;
        add_text(svg, lx, ly, "axis-label", "middle", dimension_display_name(kDimensions[d]));
        doc.inventory.axis_labels++;
    }

    for (std::size_t v = 0; v < vectors.size(); ++v) {
        const char* color = kPalette[v];
        std::string points;
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            double a = angle(d);
            double r = radius(vectors[v].vector.scores[d]);
            if (d) points += " ";
            points += fmt(cx + r * std::cos(a)) + "," + fmt(cy + r * std::sin(a));
        }
        svg += "  <polygon class=\"series\" points=\"" + points + "\" fill=\"" + color +
               "\" fill-opacity=\"0.15\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        doc.inventory.polygons++;
    }

    for (std::size_t v = 0; v < vectors.size(); ++v) {
        double y = 24.0 + 18.0 * static_cast<double>(v);
        svg += "  <g class=\"legend-item\">\n";
        svg += "    <rect x=\"16\" y=\"" + fmt(y - 10.0) +
               "\" width=\"12\" height=\"12\" fill=\"" + std::string(kPalette[v]) + "\"/>\n";
        add_text(svg, 34.0, y, "legend-label", "start", vectors[v].label);
        svg += "  </g>\n";
        doc.inventory.legend_items++;
    }

    add_text(svg, cx, 590.0, "caption", "middle", "radial scale: 1 at center, 5 at outer ring");
    svg += "</svg>\n";
    return doc;
}

std::string render_table(const PredictionReport& report, TableFormat format) {
    std::string out;
    if (format == TableFormat::Markdown) {
        out += "| Model |";
        for (Dimension d : kDimensions) {
            out += " " + std::string(dimension_display_name(d)) + " |";
        }
        out += "\n|---|";
        for (std::size_t d = 0; d < kDimensionCount; ++d) {
            out += "---|";
        }
        out += "\n";
        for (const ModelPrediction& entry : report.models) {
            out += "| " + std::string(model_display_name(entry.kind)) + " |";
            for (double v : entry.prediction) {
                out += " " + fmt5(v) + " |";
            }
            out += "\n";
        }
    } else {
        out += "model";
        for (Dimension d : kDimensions) {
            out += "," + std::string(dimension_token(d));
        }
        out += "\n";
        for (const ModelPrediction& entry : report.models) {
            out += std::string(model_display_name(entry.kind));
            for (double v : entry.prediction) {
                out += "," + fmt5(v);
            }
            out += "\n";
        }
    }
    return out;
}

SvgDocument render_loss_curve(std::span<const double> losses) {
    if (losses.empty()) {
        throw std::invalid_argument("render_loss_curve: empty loss history");
    }
    const int width = 800;
    const int height = 400;
    const double left = 60.0, right = 780.0, top = 20.0, bottom = 355.0;

    double lo = losses[0];
    double hi = losses[0];
    for (double v : losses) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::size_t n = losses.size();
    auto x_of = [&](std::size_t epoch) {
        if (n == 1) {
            return (left + right) / 2.0;
        }
        return left + (right - left) * static_cast<double>(epoch) / static_cast<double>(n - 1);
    };
    auto y_of = [&](double loss) { return top + (bottom - top) * (1.0 - (loss - lo) / (hi - lo)); };

    SvgDocument doc;
    doc.width = width;
    doc.height = height;
    std::string& svg = doc.xml;
    svg = svg_open(width, height);

    add_line(svg, "axis", left, top, left, bottom, "#333333");
    add_line(svg, "axis", left, bottom, right, bottom, "#333333");
    doc.inventory.axes = 2;

    // y ticks: 5 evenly spaced loss values.
    for (int k = 0; k < 5; ++k) {
        double v = lo + (hi - lo) * static_cast<double>(k) / 4.0;
        double y = y_of(v);
        add_line(svg, "tick", left - 5.0, y, left, y, "#333333");
        add_text(svg, left - 8.0, y + 4.0, "tick-label", "end", fmt_tick(v));
        doc.inventory.axis_labels++;
    }
    // x ticks: up to 5 distinct integer epochs.
    std::vector<std::size_t> epochs;
    for (int k = 0; k < 5; ++k) {
        auto e = static_cast<std::size_t>(std::llround(static_cast<double>(k) *
                                                       static_cast<double>(n - 1) / 4.0));
        if (epochs.empty() || epochs.back() != e) {
            epochs.push_back(e);
        }
    }
    for (std::size_t e : epochs) {
        double x = x_of(e);
        add_line(svg, "tick", x, bottom, x, bottom + 5.0, "#333333");
        add_text(svg, x, bottom + 18.0, "tick-label", "middle", std::to_string(e));
        doc.inventory.axis_labels++;
    }

    if (n == 1) {
        svg += "  <circle class=\"loss-point\" cx=\"" + fmt(x_of(0)) + "\" cy=\"" +
               fmt(y_of(losses[0])) + "\" r=\"4\" fill=\"" + std::string(kPalette[0]) + "\"/>\n";
        doc.inventory.points = 1;
    } else {
        std::string points;
        for (std::size_t e = 0; e < n; ++e) {
            if (e) points += " ";
            points += fmt(x_of(e)) + "," + fmt(y_of(losses[e]));
        }
        svg += "  <polyline class=\"loss-curve\" points=\"" + points +
               "\" fill=\"none\" stroke=\"" + std::string(kPalette[0]) + "\" stroke-width=\"2\"/>\n";
        doc.inventory.polylines = 1;
    }

    add_text(svg, (left + right) / 2.0, 390.0, "caption", "middle", "epoch");
    add_text(svg, 16.0, (top + bottom) / 2.0, "caption", "middle", "loss",
             " transform=\"rotate(-90 16.00 187.50)\"");
    svg += "</svg>\n";
    return doc;
}

SvgDocument render_grouped_bars(const PredictionReport& report) {
    const int width = 800;
    const int height = 400;
    const double left = 60.0, right = 620.0, top = 20.0, bottom = 355.0;
    const double plot_h = bottom - top;

    auto y_of = [&](double score) { return top + plot_h * (1.0 - score / 5.0); };

    SvgDocument doc;
    doc.width = width;
    doc.height = height;
    std::string& svg = doc.xml;
    svg = svg_open(width, height);

    add_line(svg, "axis", left, top, left, bottom, "#333333");
    add_line(svg, "axis", left, bottom, right, bottom, "#333333");
    doc.inventory.axes = 2;

    for (int s = 0; s <= 5; ++s) {
        double y = y_of(s);
        add_line(svg, "tick", left - 5.0, y, left, y, "#333333");
        add_text(svg, left - 8.0, y + 4.0, "tick-label", "end", std::to_string(s));
        doc.inventory.axis_labels++;
    }

    double group_w = (right - left) / static_cast<double>(kDimensionCount);
    double bar_w = group_w / 9.0;
    for (std::size_t d = 0; d < kDimensionCount; ++d) {
        double group_left = left + group_w * static_cast<double>(d);
        double start = group_left + (group_w - bar_w * static_cast<double>(kModelCount)) / 2.0;
        for (std::size_t m = 0; m < kModelCount; ++m) {
            double v = report.models[m].prediction[d];
            double h = plot_h * v / 5.0;
            svg += "  <rect class=\"bar\" x=\"" + fmt(start + bar_w * static_cast<double>(m)) +
                   "\" y=\"" + fmt(bottom - h) + "\" width=\"" + fmt(bar_w) + "\" height=\"" +
                   fmt(h) + "\" fill=\"" + std::string(kPalette[m]) + "\"/>\n";
            doc.inventory.bars++;
        }
        add_text(svg, group_left + group_w / 2.0, bottom + 18.0, "group-label", "middle",
                 dimension_display_name(kDimensions[d]));
        doc.inventory.axis_labels++;
    }

    for (std::size_t m = 0; m < kModelCount; ++m) {
        double y = top + 16.0 * static_cast<double>(m);
        svg += "  <g class=\"legend-item\">\n";
        svg += "    <rect x=\"640\" y=\"" + fmt(y) + "\" width=\"12\" height=\"12\" fill=\"" +
               std::string(kPalette[m]) + "\"/>\n";
        add_text(svg, 658.0, y + 10.0, "legend-label", "start",
                 model_display_name(kModelKinds[m]));
        svg += "  </g>\n";
        doc.inventory.legend_items++;
    }

    add_text(svg, (left + right) / 2.0, 390.0, "caption", "middle", "resilience dimension");
    svg += "</svg>\n";
    return doc;
}

} // namespace cdri
