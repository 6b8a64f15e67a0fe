#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace vbpi {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

// log(sum(exp(x))). Returns -inf for an empty span or when every term is -inf.
inline double LogSumExp(std::span<const double> xs) {
  double max = kNegInf;
  for (double x : xs) max = std::max(max, x);
  if (max == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max);
  return max + std::log(sum);
}

inline double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double max = std::max(a, b);
  return max + std::log1p(std::exp(-std::abs(a - b)));
}

inline double Softplus(double x) {
  return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Inverse of Softplus for y > 0.
inline double SoftplusInverse(double y) {
  return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

// log((2n-5)!!), the number of unrooted binary topologies on n >= 3 taxa.
inline double LogUnrootedTopologyCount(size_t taxon_count) {
  double acc = 0.0;
  for (size_t k = 3; k + 5 <= 2 * taxon_count; k += 2) acc += std::log(double(k));
  return acc;
}

// In-place log-softmax over a span of logits.
inline void LogSoftmaxInPlace(std::span<double> values) {
  double lse = LogSumExp(values);
  for (double& v : values) v -= lse;
}

}  // namespace vbpi
