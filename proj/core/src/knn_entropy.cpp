#include "ippo/knn_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ippo/errors.hpp"

namespace ippo {

double digamma_int(int n) {
  if (n < 1) throw ValidationError("digamma_int: n must be >= 1");
  double sum = -std::numbers::egamma;
  for (int j = 1; j < n; ++j) sum += 1.0 / j;
  return sum;
}

double log_unit_ball_volume(int m) {
  if (m < 1) throw ValidationError("dimension must be >= 1");
  const double half = 0.5 * m;
  return half * std::log(std::numbers::pi) - std::lgamma(half + 1.0);
}

double knn_entropy_estimate(std::span<const double> samples, int dim, int k) {
  if (dim < 1) throw ValidationError("knn entropy: dim must be >= 1");
  if (k < 1) throw ValidationError("knn entropy: k must be >= 1");
  const std::size_t m = static_cast<std::size_t>(dim);
  if (samples.size() % m != 0) {
    throw ShapeError("knn entropy: sample count is not a multiple of dim");
  }
  const std::size_t n = samples.size() / m;
  if (n <= static_cast<std::size_t>(k)) {
    throw ValidationError("knn entropy: need more than k samples");
  }

  constexpr double kFloor = 1e-12;
  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<double> nearest(kk);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Squared distances of the k closest points, ascending.
    std::fill(nearest.begin(), nearest.end(),
              std::numeric_limits<double>::infinity());
    const double* xi = samples.data() + i * m;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* xj = samples.data() + j * m;
      double d2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double diff = xi[c] - xj[c];
        d2 += diff * diff;
      }
      if (d2 >= nearest[kk - 1]) continue;
      std::size_t pos = kk - 1;
      while (pos > 0 && nearest[pos - 1] > d2) {
        nearest[pos] = nearest[pos - 1];
        --pos;
      }
      nearest[pos] = d2;
    }
    log_sum += std::log(std::max(std::sqrt(nearest[kk - 1]), kFloor));
  }
  return digamma_int(static_cast<int>(n)) - digamma_int(k) +
         log_unit_ball_volume(dim) +
         static_cast<double>(m) * log_sum / static_cast<double>(n);
}

}  // namespace ippo
