#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vbpi/alignment.hpp"
#include "vbpi/newick.hpp"
#include "vbpi/rng.hpp"
#include "vbpi/topology.hpp"

namespace vbpi {

// Row-major 4x4 matrices in A, C, G, T order.
using Matrix4 = std::array<double, 16>;

Matrix4 JC69Transition(double t);
// Elementwise d/dt of JC69Transition.
Matrix4 JC69TransitionDerivative(double t);

struct PriorConfig {
  double branch_rate = 10.0;
  bool include_topology_constant = true;
};

// Exponential branch prior plus, optionally, the uniform unrooted-topology prior.
double LogPrior(const Topology& t, const BranchLengths& branches, const PriorConfig& config);

// JC69 likelihood of a fixed alignment, evaluated by pruning over compressed site
// patterns with per-site rescaling. Evaluations are const and allocate their own
// workspace, so one instance may serve many threads.
class PhyloLikelihood {
 public:
  explicit PhyloLikelihood(const Alignment& alignment);
  explicit PhyloLikelihood(SitePatterns patterns);

  size_t TaxonCount() const { return patterns_.taxon_count; }
  const SitePatterns& Patterns() const { return patterns_; }

  double LogLikelihood(const Topology& t, const BranchLengths& branches) const;
  // Prunes toward `traversal_root`; the value does not depend on that choice.
  double LogLikelihood(const Topology& t, const BranchLengths& branches, int traversal_root) const;
  // Also fills grad[v] = d log L / d b(v) for every edge v (node-indexed; root entry 0).
  double LogLikelihoodWithGradient(const Topology& t, const BranchLengths& branches,
                                   std::vector<double>& grad) const;

 private:
  void CheckInputs(const Topology& t, const BranchLengths& branches) const;

  SitePatterns patterns_;
};

// Draws sequences down the tree from a uniform root state.
std::vector<std::string> SimulateJC69(const Topology& t, const BranchLengths& branches,
                                      size_t site_count, Rng& rng);

}  // namespace vbpi
