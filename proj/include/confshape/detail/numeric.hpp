#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace confshape::detail {

// Neumaier-compensated sum. Inner products against the zero-sum scoring
// vector must cancel to exactly 0.0 for constant inputs; a plain
// left-to-right sum loses that by one ulp about half the time.
inline double neumaier_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : xs) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

inline double compensated_dot(std::span<const double> a,
                              std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch");
  }
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = a[i] * b[i];
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  return neumaier_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace confshape::detail
