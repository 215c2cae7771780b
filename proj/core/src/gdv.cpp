#include "asclens/gdv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "text_util.hpp"

namespace asclens {

namespace {

struct CompactLabels {
  std::vector<std::size_t> index;  // per point
  std::vector<std::size_t> sizes;  // per class
};

CompactLabels compact(const LabeledPointCloud& cloud) {
  if (cloud.labels.size() != cloud.points.rows()) {
    throw Error(Errc::length_mismatch, "point cloud has " + std::to_string(cloud.points.rows()) +
                                           " points but " + std::to_string(cloud.labels.size()) +
                                           " labels");
  }
  std::map<int, std::size_t> ids;
  for (int l : cloud.labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [id, idx] : ids) idx = next++;
  CompactLabels out;
  out.sizes.assign(ids.size(), 0);
  out.index.reserve(cloud.labels.size());
  for (int l : cloud.labels) {
    const auto idx = ids.at(l);
    out.index.push_back(idx);
    ++out.sizes[idx];
  }
  return out;
}

/// Sums of pair distances per class pair (upper triangle incl. diagonal).
Matrix pair_distance_sums(const Matrix& points, const CompactLabels& labels) {
  const std::size_t n = points.rows();
  const std::size_t k = labels.sizes.size();
  Matrix sums(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = points.row(i);
    const std::size_t li = labels.index[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(a, points.row(j));
      const std::size_t lj = labels.index[j];
      sums(std::min(li, lj), std::max(li, lj)) += d;
    }
  }
  return sums;
}

void require_valid_cloud(const LabeledPointCloud& cloud, const CompactLabels& labels) {
  if (cloud.points.rows() < 2) throw Error(Errc::invariant_violation, "GDV needs at least 2 points");
  if (labels.sizes.size() < 2) throw Error(Errc::invariant_violation, "GDV needs at least 2 classes");
  for (std::size_t c = 0; c < labels.sizes.size(); ++c) {
    if (labels.sizes[c] < 2) {
      throw Error(Errc::invariant_violation,
                  "class " + std::to_string(c) + " has fewer than 2 points");
    }
  }
}

std::vector<double> intra_from_sums(const Matrix& sums, const CompactLabels& labels) {
  std::vector<double> out(labels.sizes.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double n = static_cast<double>(labels.sizes[c]);
    out[c] = sums(c, c) / (n * (n - 1.0) / 2.0);
  }
  return out;
}

Matrix inter_from_sums(const Matrix& sums, const CompactLabels& labels) {
  const std::size_t k = labels.sizes.size();
  Matrix out(k, k);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t m = l + 1; m < k; ++m) {
      const double v = sums(l, m) / (static_cast<double>(labels.sizes[l]) *
                                     static_cast<double>(labels.sizes[m]));
      out(l, m) = v;
      out(m, l) = v;
    }
  }
  return out;
}

}  // namespace

Matrix rescale(const Matrix& points) {
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();
  Matrix out(n, dims);
  if (n == 0) return out;
  for (std::size_t d = 0; d < dims; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += points(i, d);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = points(i, d) - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) out(i, d) = 0.5 * (points(i, d) - mean) / sd;
  }
  return out;
}

std::vector<double> mean_intra(const LabeledPointCloud& cloud) {
  const auto labels = compact(cloud);
  for (std::size_t c = 0; c < labels.sizes.size(); ++c) {
    if (labels.sizes[c] < 2) {
      throw Error(Errc::invariant_violation,
                  "class " + std::to_string(c) + " has fewer than 2 points");
    }
  }
  return intra_from_sums(pair_distance_sums(cloud.points, labels), labels);
}

Matrix mean_inter(const LabeledPointCloud& cloud) {
  const auto labels = compact(cloud);
  return inter_from_sums(pair_distance_sums(cloud.points, labels), labels);
}

double gdv(const LabeledPointCloud& cloud) {
  const auto labels = compact(cloud);
  require_valid_cloud(cloud, labels);
  const Matrix scaled = rescale(cloud.points);
  const Matrix sums = pair_distance_sums(scaled, labels);
  const auto intra = intra_from_sums(sums, labels);
  const Matrix inter = inter_from_sums(sums, labels);

  const double k = static_cast<double>(labels.sizes.size());
  double intra_mean = 0.0;
  for (double v : intra) intra_mean += v;
  intra_mean /= k;
  double inter_sum = 0.0;
  for (std::size_t l = 0; l < labels.sizes.size(); ++l) {
    for (std::size_t m = l + 1; m < labels.sizes.size(); ++m) inter_sum += inter(l, m);
  }
  const double inter_mean = 2.0 * inter_sum / (k * (k - 1.0));
  return (intra_mean - inter_mean) / std::sqrt(static_cast<double>(cloud.points.cols()));
}

GdvTable gdv_sweep(const ActivationArchive& archive, std::span<const TokenRole> roles,
                   std::span<const std::size_t> layers) {
  std::vector<std::pair<std::size_t, TokenRole>> cells;
  for (auto layer : layers) {
    if (layer > archive.n_layers()) {
      throw Error(Errc::invalid_argument, "layer " + std::to_string(layer) + " outside [0, " +
                                              std::to_string(archive.n_layers()) + "]");
    }
    for (auto role : roles) cells.emplace_back(layer, role);
  }
  std::vector<double> values(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto slice = slice_role(archive, cells[c].second, cells[c].first);
    LabeledPointCloud cloud{slice.features, {}};
    cloud.labels.reserve(slice.labels.size());
    for (auto label : slice.labels) cloud.labels.push_back(static_cast<int>(label));
    values[c] = gdv(cloud);
  });
  GdvTable table;
  for (std::size_t c = 0; c < cells.size(); ++c) table.entries[cells[c]] = values[c];
  return table;
}

std::string gdv_table_to_csv(const GdvTable& table) {
  std::string out = "layer,role,gdv\n";
  for (const auto& [key, value] : table.entries) {
    out += std::to_string(key.first) + "," + std::string(to_string(key.second)) + "," +
           detail::fixed6(value) + "\n";
  }
  return out;
}

GdvTable gdv_table_from_csv(const std::string& text) {
  const auto rows = detail::parse_csv(text);
  detail::expect_header(rows, {"layer", "role", "gdv"});
  GdvTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw Error(Errc::invalid_argument, "gdv CSV row with wrong arity");
    const auto role = parse_role(rows[r][1]);
    if (!role) throw Error(Errc::invalid_argument, "unknown role '" + rows[r][1] + "'");
    table.entries[{static_cast<std::size_t>(detail::parse_int(rows[r][0])), *role}] =
        detail::parse_double(rows[r][2]);
  }
  return table;
}

}  // namespace asclens
