#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asclens/archive.hpp"
#include "asclens/matrix.hpp"
#include "asclens/types.hpp"

namespace asclens {

/// N points in D dimensions with one class id per point. Class ids are
/// arbitrary integers; they are compacted in ascending order internally.
struct LabeledPointCloud {
  Matrix points;
  std::vector<int> labels;
};

/// Per-dimension z-scoring scaled by one half (population deviation).
/// Zero-variance dimensions map to 0.
Matrix rescale(const Matrix& points);

/// Mean Euclidean distance over unordered within-class pairs, per class in
/// ascending class-id order. Distances are taken on the points as given.
/// Throws Error(invariant_violation) if a class has fewer than two points.
std::vector<double> mean_intra(const LabeledPointCloud& cloud);

/// Mean distance over all cross pairs for every class pair; symmetric
/// L x L matrix with a zero diagonal.
Matrix mean_inter(const LabeledPointCloud& cloud);

/// Generalized Discrimination Value. Rescaling is applied internally.
/// Throws Error(invariant_violation) unless N >= 2, L >= 2 and every class
/// has at least two points.
double gdv(const LabeledPointCloud& cloud);

struct GdvTable {
  std::map<std::pair<std::size_t, TokenRole>, double> entries;
};

/// GDV of the four construction classes for each (layer, role) cell.
/// Cells are computed in parallel; the result does not depend on the thread
/// count.
GdvTable gdv_sweep(const ActivationArchive& archive, std::span<const TokenRole> roles,
                   std::span<const std::size_t> layers);

/// CSV `layer,role,gdv`, layers ascending then roles in enum order.
std::string gdv_table_to_csv(const GdvTable& table);
GdvTable gdv_table_from_csv(const std::string& text);

}  // namespace asclens
