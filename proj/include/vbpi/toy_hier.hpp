#pragma once

#include <cstdint>
#include <vector>

#include "vbpi/objective.hpp"
#include "vbpi/rng.hpp"

namespace vbpi {

// p(z1, z2) = p1[z1] * p2[z1][z2].
struct HierTarget {
  std::vector<double> p1;
  std::vector<std::vector<double>> p2;

  size_t N1() const { return p1.size(); }
  size_t N2() const { return p2.empty() ? 0 : p2[0].size(); }
  double LogProb(size_t z1, size_t z2) const;
};

// p1 and every row of p2 drawn from a symmetric Dirichlet(0.5).
HierTarget MakeTarget(size_t n1, size_t n2, uint64_t seed);

// One two-level categorical q(z1) q(z2 | z1) with softmax logits.
struct HierComponent {
  std::vector<double> logits1;               // n1
  std::vector<std::vector<double>> logits2;  // n1 x n2

  double LogProb(size_t z1, size_t z2) const;
  // Flat layout: logits1 then logits2 row by row.
  std::vector<double> Flatten() const;
  void Assign(std::span<const double> flat);
};

// Uniform mixture of S components.
struct HierApprox {
  std::vector<HierComponent> components;

  static HierApprox Uniform(size_t S, size_t n1, size_t n2);
  size_t Size() const { return components.size(); }
  double LogProb(size_t z1, size_t z2) const;
  std::pair<size_t, size_t> Sample(size_t component, Rng& rng) const;
};

// Exact sums over all n1 * n2 states. KlQToP is +inf when q puts mass where p has none;
// KlPToQ is +inf when q has no mass where p does.
double KlQToP(const HierApprox& approx, const HierTarget& target);
double KlPToQ(const HierApprox& approx, const HierTarget& target);

// Total-variation distance between two components' joint distributions.
double TotalVariation(const HierComponent& a, const HierComponent& b, size_t n1, size_t n2);

// Mixture VIMCO estimate over K draws per component, as flat per-component vectors.
struct ToyGradient {
  std::vector<std::vector<double>> grads;
  double miselbo = 0.0;
};
ToyGradient ToyVimcoGradient(const HierApprox& approx, const HierTarget& target, size_t K,
                             Rng& rng);

// Learning rates used for S = 1..5.
double DefaultToyLearningRate(size_t S);

struct ToyTrainConfig {
  size_t S = 1;
  size_t K = 20;
  size_t iterations = 10000;
  double learning_rate = 0.01;
  uint64_t seed = 0;
  size_t log_every = 100;
};

struct ToyCurvePoint {
  size_t iteration = 0;
  double kl = 0.0;
};

struct ToyTrainResult {
  HierApprox approx;
  std::vector<ToyCurvePoint> curve;  // KL(q || p) before the logged iteration's update
};

// Plain stochastic gradient ascent from the uniform initialization.
ToyTrainResult TrainToy(const HierTarget& target, const ToyTrainConfig& config);

}  // namespace vbpi
