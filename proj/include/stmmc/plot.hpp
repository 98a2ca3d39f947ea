#ifndef STMMC_PLOT_HPP
#define STMMC_PLOT_HPP

#include "stmmc/cluster.hpp"
#include "stmmc/ingest.hpp"

#include <array>
#include <string>
#include <string_view>

namespace stmmc {

/// Qualitative palette; cluster c uses entry c % 12.
inline constexpr std::array<std::string_view, 12> cluster_palette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
};

/// Spatial cluster map: one filled circle per spot, one legend entry (swatch + id) per cluster present.
/// Image coordinates: y grows downward.
std::string render_cluster_svg(const LabelVector& labels, const CoordinateSet& coords);

} // namespace stmmc

#endif
