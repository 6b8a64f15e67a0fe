#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vbpi {

// Adam moments for one parameter vector. Step() ascends.
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<double> m;
  std::vector<double> v;
  size_t t = 0;

  void Step(std::span<double> params, std::span<const double> grad, double lr);
  bool operator==(const AdamState&) const = default;
};

// Everything beyond the model needed to resume a run exactly.
struct TrainerState {
  size_t iteration = 0;
  std::vector<AdamState> sbn;     // per component
  std::vector<AdamState> branch;  // per component

  bool operator==(const TrainerState&) const = default;
};

}  // namespace vbpi
