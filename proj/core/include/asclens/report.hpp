#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asclens/attention.hpp"
#include "asclens/matrix.hpp"
#include "asclens/types.hpp"

namespace asclens {

inline constexpr double kCanvasWidth = 800.0;
inline constexpr double kCanvasHeight = 600.0;
inline constexpr double kCanvasMargin = 40.0;

/// Fill color of each construction (#rrggbb).
std::string_view construction_color(ConstructionLabel label) noexcept;
/// Stroke color of each token role (#rrggbb).
std::string_view role_color(TokenRole role) noexcept;

/// Scatter plot of an N x 2 embedding, one circle per point.
/// Throws Error(length_mismatch).
std::string render_scatter(const Matrix& coords, std::span<const ConstructionLabel> labels,
                           const std::string& title);

using LineSeries = std::map<TokenRole, std::vector<std::pair<double, double>>>;

/// One polyline per role, x = layer. Empty series are skipped.
std::string render_line(const LineSeries& series, const std::string& y_label,
                        const std::string& title = "");

/// Per-head FDR dots and a dashed per-layer mean segment for one role.
/// Throws Error(missing_role).
std::string render_fdr_dots(const AttentionStats& stats, TokenRole role);

}  // namespace asclens
