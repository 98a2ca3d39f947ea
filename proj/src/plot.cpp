#include "stmmc/plot.hpp"

#include "stmmc/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace stmmc {

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string render_cluster_svg(const LabelVector& labels, const CoordinateSet& coords) {
    const Index n = coords.size();
    if (static_cast<Index>(labels.size()) != n || n == 0) {
        throw DataError("plot: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " spots");
    }
    labels.validate();

    constexpr double plot_size = 600.0;
    constexpr double margin = 20.0;
    constexpr double legend_width = 120.0;

    const double min_x = coords.coords.col(0).minCoeff();
    const double max_x = coords.coords.col(0).maxCoeff();
    const double min_y = coords.coords.col(1).minCoeff();
    const double max_y = coords.coords.col(1).maxCoeff();
    const double extent = std::max({max_x - min_x, max_y - min_y, 1e-12});
    const double scale = plot_size / extent;

    double radius = 4.0;
    if (n > 1) {
        const auto nn = nearest_neighbors(coords.coords, 1);
        std::vector<double> d;
        d.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            d.push_back((coords.coords.row(i) - coords.coords.row(nn[static_cast<std::size_t>(i)][0])).norm());
        }
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
        radius = std::clamp(0.45 * d[d.size() / 2] * scale, 1.0, 20.0);
    }

    const double width = plot_size + 2 * margin + legend_width;
    const double height = plot_size + 2 * margin;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
                      "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) + "\" fill=\"#ffffff\"/>\n";
    svg += "<g class=\"spots\">\n";
    for (Index i = 0; i < n; ++i) {
        const int label = labels.labels[static_cast<std::size_t>(i)];
        const double cx = margin + (coords.coords(i, 0) - min_x) * scale;
        const double cy = margin + (coords.coords(i, 1) - min_y) * scale;
        svg += "<circle cx=\"" + fixed(cx) + "\" cy=\"" + fixed(cy) + "\" r=\"" + fixed(radius) + "\" fill=\"" +
               std::string(cluster_palette[static_cast<std::size_t>(label) % cluster_palette.size()]) + "\"/>\n";
    }
    svg += "</g>\n<g class=\"legend\">\n";
    const std::set<int> present(labels.labels.begin(), labels.labels.end());
    double y = margin;
    for (int label : present) {
        const double x = plot_size + 2 * margin;
        svg += "<g class=\"legend-entry\"><rect x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"14\" height=\"14\" fill=\"" +
               std::string(cluster_palette[static_cast<std::size_t>(label) % cluster_palette.size()]) + "\"/><text x=\"" +
               fixed(x + 20) + "\" y=\"" + fixed(y + 12) + "\" font-family=\"sans-serif\" font-size=\"12\">cluster " +
               std::to_string(label) + "</text></g>\n";
        y += 20.0;
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

} // namespace stmmc
