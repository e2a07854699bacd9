#pragma once

#include <string>

namespace synet {

enum class PlotKind { FprCurve, Histogram, LossLog };

PlotKind plot_kind_from_string(const std::string& name);

// Renders a CSV artifact to a self-contained SVG chart. Output bytes are a
// pure function of the input text. Throws SchemaError when the CSV header
// does not match the kind or the file has no data rows.
std::string render_plot(PlotKind kind, const std::string& csv_text);

}  // namespace synet
