#pragma once

#include "cdri/core.hpp"
#include "cdri/pipeline.hpp"

#include <span>
#include <string>
#include <vector>

namespace cdri {

/// Element counts declared by the renderer; tests reconcile them against the
/// emitted XML.
struct SvgInventory {
    int axes = 0;
    int rings = 0;
    int polygons = 0;
    int polylines = 0;
    int points = 0;
    int bars = 0;
    int axis_labels = 0;
    int legend_items = 0;
};

struct SvgDocument {
    int width = 0;
    int height = 0;
    SvgInventory inventory;
    std::string xml;
};

struct LabeledVector {
    std::string label;
    ResilienceVector vector;
};

/// Pentagon radar chart, 600x600. Radius is linear in score: 1 at the center,
/// 5 on the outer ring; vertices follow the canonical dimension order starting
/// at 12 o'clock, proceeding clockwise. 1..8 overlaid vectors. Throws
/// std::invalid_argument on an empty or oversized input or a component
/// outside [1,5] (tolerance 1e-9 for accumulated rounding).
SvgDocument render_spider(const std::vector<LabeledVector>& vectors);

enum class TableFormat { Markdown, Csv };

/// The model-comparison table: 6 rows in canonical model order, 5 value
/// columns in canonical dimension order, fixed 5-decimal formatting.
std::string render_table(const PredictionReport& report, TableFormat format);

/// Loss-per-epoch chart, 800x400, linear axes with tick labels. A single
/// value renders as one point marker. Throws std::invalid_argument on an
/// empty history.
SvgDocument render_loss_curve(std::span<const double> losses);

/// Grouped prediction bars, 800x400: 5 dimension groups x 6 model bars,
/// heights linear in score over [0,5], legend keyed by model.
SvgDocument render_grouped_bars(const PredictionReport& report);

} // namespace cdri
