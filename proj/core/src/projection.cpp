#include "asclens/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asclens/eigen.hpp"
#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "asclens/rng.hpp"
#include "text_util.hpp"

namespace asclens {

std::string_view to_string(ProjectionMethod method) noexcept {
  return method == ProjectionMethod::mds ? "mds" : "tsne";
}

DistanceMatrix::DistanceMatrix(Matrix values) : values_(std::move(values)) {
  const std::size_t n = values_.rows();
  if (n != values_.cols()) throw Error(Errc::non_symmetric, "distance matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0) throw Error(Errc::non_symmetric, "distance matrix diagonal is not zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = values_(i, j);
      const double b = values_(j, i);
      if (!(a >= 0.0) || !(b >= 0.0)) {
        throw Error(Errc::non_symmetric, "distance matrix has a negative or NaN entry");
      }
      if (std::abs(a - b) > 1e-9) {
        throw Error(Errc::non_symmetric, "distance matrix is not symmetric at (" + std::to_string(i) +
                                             "," + std::to_string(j) + ")");
      }
    }
  }
}

DistanceMatrix pairwise_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix d(n, n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = euclidean_distance(points.row(i), points.row(j));
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  }
  return DistanceMatrix(std::move(d));
}

Embedding2D classical_mds(const DistanceMatrix& dist, std::size_t out_dim) {
  const std::size_t n = dist.size();
  if (out_dim == 0 || n < 2 || out_dim > n - 1) {
    throw Error(Errc::invalid_argument, "classical MDS needs 1 <= out_dim <= N-1 (N=" +
                                            std::to_string(n) + ", out_dim=" +
                                            std::to_string(out_dim) + ")");
  }

  // B = -1/2 J D^2 J, expanded through row and grand means of D^2.
  Matrix sq(n, n);
  std::vector<double> row_mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dist(i, j) * dist(i, j);
      sq(i, j) = v;
      row_mean[i] += v;
    }
    row_mean[i] /= static_cast<double>(n);
  }
  double grand = 0.0;
  for (double r : row_mean) grand += r;
  grand /= static_cast<double>(n);

  Matrix b(n, n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
      b(i, j) = v;
      b(j, i) = v;
      norm += (i == j ? 1.0 : 2.0) * v * v;
    }
  }
  norm = std::sqrt(norm);

  const EigenPairs eig = top_eigenpairs(b, out_dim);
  if (!(eig.values.front() > 1e-12 * norm)) {
    throw Error(Errc::degenerate_embedding, "no positive eigenvalue; all points coincide");
  }

  Embedding2D out;
  out.method = ProjectionMethod::mds;
  out.out_dim = out_dim;
  out.eigenvalues = eig.values;
  out.coords = Matrix(n, out_dim);
  for (std::size_t k = 0; k < out_dim; ++k) {
    const double scale = std::sqrt(std::max(eig.values[k], 0.0));
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(eig.vectors(i, k)) > std::abs(eig.vectors(pivot, k))) pivot = i;
    }
    const double sign = eig.vectors(pivot, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.coords(i, k) = sign * eig.vectors(i, k) * scale;
  }
  return out;
}

double perplexity_row(std::span<const double> sq, double perplexity, double tolerance,
                      std::size_t max_steps, std::span<double> row) {
  const double target = std::log(perplexity);
  double dmin = std::numeric_limits<double>::infinity();
  double dmean = 0.0;
  for (double d : sq) {
    dmin = std::min(dmin, d);
    dmean += d;
  }
  dmean /= static_cast<double>(sq.size());
  // Distances are shifted by their minimum so exp() never underflows for
  // every neighbor at once; the shift cancels in the normalization.
  double beta = dmean - dmin > 0.0 ? 1.0 / (dmean - dmin) : 1.0;
  double beta_lo = -std::numeric_limits<double>::infinity();
  double beta_hi = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < sq.size(); ++j) {
      const double shifted = sq[j] - dmin;
      const double p = std::exp(-shifted * beta);
      row[j] = p;
      sum += p;
      weighted += shifted * p;
    }
    entropy = std::log(sum) + beta * weighted / sum;
    for (double& p : row) p /= sum;
    const double diff = entropy - target;
    if (std::abs(diff) < tolerance) break;
    if (diff > 0.0) {
      beta_lo = beta;
      beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
    } else {
      beta_hi = beta;
      beta = std::isinf(beta_lo) ? beta / 2.0 : 0.5 * (beta + beta_lo);
    }
  }
  return entropy;
}

Matrix joint_probabilities(const Matrix& points, double perplexity, double tolerance,
                           std::size_t max_steps) {
  const std::size_t n = points.rows();
  Matrix conditional(n, n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> sq;
    sq.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sq.push_back(squared_distance(points.row(i), points.row(j)));
    }
    std::vector<double> row(n - 1);
    perplexity_row(sq, perplexity, tolerance, max_steps, row);
    auto out = conditional.row(i);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) out[j] = row[k++];
    }
  });
  Matrix joint(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (conditional(i, j) + conditional(j, i)) / denom;
      joint(i, j) = v;
      joint(j, i) = v;
    }
  }
  return joint;
}

namespace {

/// Student-t numerators 1 / (1 + |y_i - y_j|^2) and their total.
double student_kernel(const Matrix& y, Matrix& num) {
  const std::size_t n = y.rows();
  std::vector<double> row_sums(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    auto out = num.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        out[j] = 0.0;
        continue;
      }
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      out[j] = v;
      s += v;
    }
    row_sums[i] = s;
  });
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

}  // namespace

double kl_divergence(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix num(n, n);
  const double z = student_kernel(y, num);
  std::vector<double> row_kl(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p(i, j);
      if (j == i || pij <= 0.0) continue;
      const double q = std::max(num(i, j) / z, 1e-12);
      s += pij * std::log(pij / q);
    }
    row_kl[i] = s;
  });
  double kl = 0.0;
  for (double v : row_kl) kl += v;
  return kl;
}

Embedding2D tsne(const Matrix& points, const TsneParams& params) {
  const std::size_t n = points.rows();
  if (n < 4) throw Error(Errc::invalid_argument, "t-SNE needs at least 4 points");
  if (!(params.perplexity > 1.0) || !(params.perplexity < static_cast<double>(n))) {
    throw Error(Errc::invalid_argument, "perplexity must lie in (1, N); got " +
                                            std::to_string(params.perplexity) + " with N=" +
                                            std::to_string(n));
  }

  const Matrix p = joint_probabilities(points, params.perplexity, params.perplexity_tolerance,
                                       params.max_bisection_steps);

  Rng rng(params.seed);
  Matrix y(n, 2);
  for (auto& v : y.values()) v = rng.normal() * params.init_scale;
  Matrix velocity(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix grad(n, 2);
  Matrix num(n, n);

  Embedding2D out;
  out.method = ProjectionMethod::tsne;
  out.out_dim = 2;
  out.tsne = params;

  for (std::size_t it = 0; it < params.iterations; ++it) {
    const double exaggeration = it < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum =
        it < params.momentum_switch_iteration ? params.initial_momentum : params.final_momentum;

    const double z = student_kernel(y, num);
    parallel_for(n, [&](std::size_t i) {
      double gx = 0.0;
      double gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        gx += w * (y(i, 0) - y(j, 0));
        gy += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    });

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 2; ++d) {
        double& g = gains(i, d);
        g = (grad(i, d) > 0.0) != (velocity(i, d) > 0.0) ? g + 0.2 : g * 0.8;
        g = std::max(g, 0.01);
        velocity(i, d) = momentum * velocity(i, d) - params.learning_rate * g * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
    }

    const std::size_t done = it + 1;
    if (done % 50 == 0 || done == params.exaggeration_iterations || done == params.iterations) {
      out.kl_history.push_back({done, kl_divergence(p, y)});
    }
  }
  out.coords = std::move(y);
  return out;
}

std::string embedding_to_csv(const Embedding2D& embedding, std::span<const std::int64_t> ids,
                             std::span<const ConstructionLabel> labels) {
  const std::size_t n = embedding.coords.rows();
  if (ids.size() != n || labels.size() != n || embedding.coords.cols() < 2) {
    throw Error(Errc::length_mismatch, "embedding, sentence ids and labels must align");
  }
  std::string out = "sentence_id,x,y,label\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(ids[i]) + "," + detail::fixed6(embedding.coords(i, 0)) + "," +
           detail::fixed6(embedding.coords(i, 1)) + "," + std::string(to_string(labels[i])) + "\n";
  }
  return out;
}

EmbeddingRows embedding_from_csv(const std::string& text) {
  const auto rows = detail::parse_csv(text);
  detail::expect_header(rows, {"sentence_id", "x", "y", "label"});
  EmbeddingRows out;
  out.coords = Matrix(rows.size() - 1, 2);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4) throw Error(Errc::invalid_argument, "embedding CSV row with wrong arity");
    out.sentence_ids.push_back(detail::parse_int(rows[r][0]));
    out.coords(r - 1, 0) = detail::parse_double(rows[r][1]);
    out.coords(r - 1, 1) = detail::parse_double(rows[r][2]);
    const auto label = parse_label(rows[r][3]);
    if (!label) throw Error(Errc::invalid_argument, "unknown label '" + rows[r][3] + "'");
    out.labels.push_back(*label);
  }
  return out;
}

}  // namespace asclens
