#pragma once

#include <memory>
#include <vector>

#include "vbpi/branch_model.hpp"
#include "vbpi/sbn.hpp"
#include "vbpi/taxon_set.hpp"

namespace vbpi {

struct Component {
  SBN sbn;
  BranchModel branch;
};

// Uniformly weighted mixture of (SBN, BranchModel) components over one taxon set.
// All SBNs share one support and all branch models share one set of tables.
class MixtureApprox {
 public:
  MixtureApprox() = default;
  MixtureApprox(TaxonSet taxa, std::vector<Component> components);

  // S components initialized identically: frequency logits and default branch params.
  static MixtureApprox FromTrees(TaxonSet taxa, std::span<const Topology> trees, size_t S,
                                 BranchMode mode);

  const TaxonSet& Taxa() const { return taxa_; }
  size_t Size() const { return components_.size(); }
  const Component& operator[](size_t i) const { return components_[i]; }
  Component& operator[](size_t i) { return components_[i]; }
  const SBNSupport& Support() const { return components_[0].sbn.Support(); }
  const BranchTables& Tables() const { return components_[0].branch.Tables(); }

  // log (1/S) sum_j q_j(t). Throws kSupportViolation only if every component does.
  double LogProb(const Topology& t) const;
  // log (1/S) sum_j q_j(B | t) q_j(t).
  double LogJoint(const Topology& t, const BranchLengths& branches) const;

 private:
  TaxonSet taxa_;
  std::vector<Component> components_;
};

}  // namespace vbpi
