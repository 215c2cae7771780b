#include "asclens/matrix.hpp"

#include <cmath>
#include <string>

#include "asclens/error.hpp"

namespace asclens {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(Errc::dimension_mismatch,
                "matrix data has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(rows * cols));
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace asclens
