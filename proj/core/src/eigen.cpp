#include "asclens/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asclens/error.hpp"
#include "asclens/parallel.hpp"
#include "asclens/rng.hpp"

namespace asclens {

namespace {

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

EigenPairs sorted_pairs(const Matrix& diag_source, const Matrix& vectors) {
  const std::size_t n = diag_source.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return diag_source(a, a) > diag_source(b, b);
  });
  EigenPairs out;
  out.values.resize(n);
  out.vectors = Matrix(vectors.rows(), n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag_source(order[k], order[k]);
    for (std::size_t r = 0; r < vectors.rows(); ++r) out.vectors(r, k) = vectors(r, order[k]);
  }
  return out;
}

// Z = A * Q, rows in parallel.
Matrix multiply(const Matrix& a, const Matrix& q) {
  Matrix z(a.rows(), q.cols());
  parallel_for(a.rows(), [&](std::size_t i) {
    auto out = z.row(i);
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < arow.size(); ++j) {
      const double aij = arow[j];
      if (aij == 0.0) continue;
      const auto qrow = q.row(j);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += aij * qrow[c];
    }
  });
  return z;
}

// Modified Gram-Schmidt with one re-orthogonalization pass; collapsed
// columns are replaced by fresh random directions.
void orthonormalize(Matrix& q, Rng& rng) {
  const std::size_t n = q.rows();
  const std::size_t m = q.cols();
  for (std::size_t c = 0; c < m; ++c) {
    double original = 0.0;
    for (std::size_t r = 0; r < n; ++r) original += q(r, c) * q(r, c);
    original = std::sqrt(original);
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < c; ++p) {
          double dot = 0.0;
          for (std::size_t r = 0; r < n; ++r) dot += q(r, p) * q(r, c);
          for (std::size_t r = 0; r < n; ++r) q(r, c) -= dot * q(r, p);
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < n; ++r) norm += q(r, c) * q(r, c);
      norm = std::sqrt(norm);
      if (norm > 1e-10 * std::max(original, 1e-300) && norm > 1e-300) {
        for (std::size_t r = 0; r < n; ++r) q(r, c) /= norm;
        break;
      }
      for (std::size_t r = 0; r < n; ++r) q(r, c) = rng.normal();
      original = 0.0;
      for (std::size_t r = 0; r < n; ++r) original += q(r, c) * q(r, c);
      original = std::sqrt(original);
    }
  }
}

struct RitzResult {
  EigenPairs pairs;  // all m Ritz pairs, descending
  bool converged = false;
};

RitzResult subspace_iteration(const Matrix& a, std::size_t count, std::size_t width,
                              double tolerance, std::size_t max_iterations) {
  const std::size_t n = a.rows();
  Rng rng(0x6d64735f65696775ULL);
  Matrix q(n, width);
  for (auto& v : q.values()) v = rng.normal();
  orthonormalize(q, rng);

  const double scale = std::max(1.0, frobenius(a));
  std::vector<double> previous;
  RitzResult result;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Matrix z = multiply(a, q);
    Matrix h(width, width);
    for (std::size_t i = 0; i < width; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += q(r, i) * z(r, j);
        h(i, j) = s;
      }
    }
    for (std::size_t i = 0; i < width; ++i) {
      for (std::size_t j = i + 1; j < width; ++j) {
        const double s = 0.5 * (h(i, j) + h(j, i));
        h(i, j) = s;
        h(j, i) = s;
      }
    }
    const EigenPairs small = jacobi_eigen(h);

    // Ritz vectors X = Q W and their images B X = Z W.
    Matrix x(n, width);
    Matrix bx(n, width);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        double sx = 0.0;
        double sz = 0.0;
        for (std::size_t p = 0; p < width; ++p) {
          sx += q(r, p) * small.vectors(p, c);
          sz += z(r, p) * small.vectors(p, c);
        }
        x(r, c) = sx;
        bx(r, c) = sz;
      }
    }

    const double ref = std::max(1.0, std::abs(small.values.front()));
    bool converged = !previous.empty();
    for (std::size_t k = 0; converged && k < count; ++k) {
      converged = std::abs(small.values[k] - previous[k]) <= tolerance * ref;
    }
    for (std::size_t k = 0; converged && k < count; ++k) {
      double res = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = bx(r, k) - small.values[k] * x(r, k);
        res += d * d;
      }
      converged = std::sqrt(res) <= 1e-8 * scale;
    }
    previous = small.values;
    result.pairs.values = small.values;
    result.pairs.vectors = std::move(x);
    if (converged) {
      result.converged = true;
      return result;
    }
    q = std::move(bx);
    orthonormalize(q, rng);
  }
  return result;
}

}  // namespace

EigenPairs jacobi_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (n != symmetric.cols()) throw Error(Errc::non_symmetric, "eigen solver needs a square matrix");
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;
  const double norm = frobenius(a);
  if (norm == 0.0) return sorted_pairs(a, v);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= tolerance * norm) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  return sorted_pairs(a, v);
}

EigenPairs top_eigenpairs(const Matrix& symmetric, std::size_t count, double tolerance,
                          std::size_t max_iterations) {
  const std::size_t n = symmetric.rows();
  if (n != symmetric.cols()) throw Error(Errc::non_symmetric, "eigen solver needs a square matrix");
  if (count == 0 || count > n) {
    throw Error(Errc::invalid_argument, "requested " + std::to_string(count) + " eigenpairs of a " +
                                            std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }

  auto truncate = [count](EigenPairs pairs) {
    EigenPairs out;
    out.values.assign(pairs.values.begin(), pairs.values.begin() + static_cast<long>(count));
    out.vectors = Matrix(pairs.vectors.rows(), count);
    for (std::size_t r = 0; r < pairs.vectors.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) out.vectors(r, c) = pairs.vectors(r, c);
    }
    return out;
  };

  if (n <= 64) return truncate(jacobi_eigen(symmetric, 1e-14));

  const std::size_t width = std::min(n, count + 8);
  RitzResult plain = subspace_iteration(symmetric, count, width, tolerance, max_iterations);
  const auto& theta = plain.pairs.values;
  double tail = std::abs(theta.back());
  for (double t : theta) tail = std::min(tail, std::abs(t));
  const double slack = 1e-9 * std::max(1.0, std::abs(theta.front()));
  if (theta[count - 1] >= tail - slack) return truncate(std::move(plain.pairs));

  // Negative eigenvalues dominate in magnitude: shift the spectrum so the
  // algebraically largest eigenvalues are also the largest in magnitude.
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (double v : symmetric.row(i)) row += std::abs(v);
    shift = std::max(shift, row);
  }
  Matrix shifted = symmetric;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) += shift;
  RitzResult moved = subspace_iteration(shifted, count, width, tolerance, max_iterations);
  for (auto& v : moved.pairs.values) v -= shift;
  return truncate(std::move(moved.pairs));
}

}  // namespace asclens
