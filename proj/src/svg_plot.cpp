#include "synet/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "synet/errors.hpp"

namespace synet {

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& text) {
    Csv csv;
    size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        size_t p = 0;
        while (true) {
            size_t comma = line.find(',', p);
            cells.push_back(line.substr(p, comma == std::string::npos ? std::string::npos : comma - p));
            if (comma == std::string::npos) break;
            p = comma + 1;
        }
        if (first) {
            csv.header = cells;
            first = false;
        } else {
            std::vector<double> row;
            row.reserve(cells.size());
            for (const auto& c : cells) {
                try {
                    row.push_back(std::stod(c));
                } catch (...) {
                    throw SchemaError("non-numeric cell in CSV data: " + c);
                }
            }
            if (row.size() != csv.header.size())
                throw SchemaError("ragged CSV row");
            csv.rows.push_back(std::move(row));
        }
    }
    if (csv.header.empty()) throw SchemaError("empty CSV");
    return csv;
}

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginL = 64;
constexpr int kMarginR = 24;
constexpr int kMarginT = 28;
constexpr int kMarginB = 48;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f",
                          "#c98a2b", "#4f6d7a", "#a23e48", "#2e6f95"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Series {
    std::string name;
    std::vector<double> x, y;
};

std::string render_chart(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<Series>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) {
        return kMarginL + (x - xmin) / (xmax - xmin) * (kWidth - kMarginL - kMarginR);
    };
    auto sy = [&](double y) {
        return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * (kHeight - kMarginT - kMarginB);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"320\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + title + "</text>\n";

    // axes + ticks
    svg += "<line x1=\"" + fmt(kMarginL) + "\" y1=\"" + fmt(kHeight - kMarginB) + "\" x2=\"" +
           fmt(kWidth - kMarginR) + "\" y2=\"" + fmt(kHeight - kMarginB) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt(kMarginL) + "\" y1=\"" + fmt(kMarginT) + "\" x2=\"" +
           fmt(kMarginL) + "\" y2=\"" + fmt(kHeight - kMarginB) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        svg += "<text x=\"" + fmt(sx(fx)) + "\" y=\"" + fmt(kHeight - kMarginB + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
               fmt(fx) + "</text>\n";
        svg += "<text x=\"" + fmt(kMarginL - 6) + "\" y=\"" + fmt(sy(fy) + 3) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(fy) +
               "</text>\n";
        svg += "<line x1=\"" + fmt(kMarginL) + "\" y1=\"" + fmt(sy(fy)) + "\" x2=\"" +
               fmt(kWidth - kMarginR) + "\" y2=\"" + fmt(sy(fy)) +
               "\" stroke=\"#eee\" stroke-width=\"1\"/>\n";
    }
    svg += "<text x=\"320\" y=\"" + fmt(kHeight - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"210\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 16 210)\">" + y_label + "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 8];
        std::string pts;
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (i) pts += ' ';
            pts += fmt(sx(series[s].x[i])) + "," + fmt(sy(series[s].y[i]));
        }
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        // legend
        double ly = kMarginT + 14.0 * static_cast<double>(s);
        svg += "<rect x=\"" + fmt(kWidth - kMarginR - 150) + "\" y=\"" + fmt(ly) +
               "\" width=\"10\" height=\"3\" fill=\"";
        svg += color;
        svg += "\"/>\n";
        svg += "<text x=\"" + fmt(kWidth - kMarginR - 135) + "\" y=\"" + fmt(ly + 5) +
               "\" font-family=\"sans-serif\" font-size=\"10\">" + series[s].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& name) {
    if (name == "fpr-curve") return PlotKind::FprCurve;
    if (name == "histogram") return PlotKind::Histogram;
    if (name == "loss-log") return PlotKind::LossLog;
    throw ConfigError("unknown plot kind: " + name);
}

std::string render_plot(PlotKind kind, const std::string& csv_text) {
    Csv csv = parse_csv(csv_text);
    if (csv.rows.empty()) throw SchemaError("CSV has no data rows");

    switch (kind) {
        case PlotKind::FprCurve: {
            if (csv.header != std::vector<std::string>{"threshold", "fpr"})
                throw SchemaError("fpr-curve expects header threshold,fpr");
            Series s{"fpr", {}, {}};
            for (const auto& row : csv.rows) {
                s.x.push_back(row[0]);
                s.y.push_back(row[1]);
            }
            return render_chart("Object-centric FPR", "threshold", "fpr", {s});
        }
        case PlotKind::Histogram: {
            if (csv.header != std::vector<std::string>{"bin_lo", "bin_hi", "p_pos", "p_neg"})
                throw SchemaError("histogram expects header bin_lo,bin_hi,p_pos,p_neg");
            Series pos{"traversable", {}, {}}, neg{"non-traversable", {}, {}};
            for (const auto& row : csv.rows) {
                double mid = 0.5 * (row[0] + row[1]);
                pos.x.push_back(mid);
                pos.y.push_back(row[2]);
                neg.x.push_back(mid);
                neg.y.push_back(row[3]);
            }
            return render_chart("Similarity score densities", "score", "density", {pos, neg});
        }
        case PlotKind::LossLog: {
            if (csv.header.size() < 3 || csv.header[0] != "epoch" || csv.header[1] != "step" ||
                csv.header[2] != "total")
                throw SchemaError("loss-log expects header epoch,step,total,...");
            std::vector<Series> series;
            for (size_t col = 2; col < csv.header.size(); ++col)
                series.push_back({csv.header[col], {}, {}});
            for (size_t i = 0; i < csv.rows.size(); ++i)
                for (size_t col = 2; col < csv.header.size(); ++col) {
                    series[col - 2].x.push_back(static_cast<double>(i));
                    series[col - 2].y.push_back(csv.rows[i][col]);
                }
            return render_chart("Training loss", "step", "loss", series);
        }
    }
    throw ConfigError("unreachable plot kind");
}

}  // namespace synet
