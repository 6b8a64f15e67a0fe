#include "vbpi/optimizer.hpp"

#include <cmath>

#include "vbpi/error.hpp"

namespace vbpi {

void AdamState::Step(std::span<double> params, std::span<const double> grad, double lr) {
  if (grad.size() != params.size()) Fail(ErrorKind::kContract, "gradient shape mismatch");
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++t;
  const double c1 = 1.0 - std::pow(kBeta1, double(t));
  const double c2 = 1.0 - std::pow(kBeta2, double(t));
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    params[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEpsilon);
  }
}

}  // namespace vbpi
