#include "vbpi/mixture.hpp"

#include <cmath>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

MixtureApprox::MixtureApprox(TaxonSet taxa, std::vector<Component> components)
    : taxa_(std::move(taxa)), components_(std::move(components)) {
  if (components_.empty()) Fail(ErrorKind::kContract, "mixture needs at least one component");
  for (const auto& c : components_) {
    if (!(c.sbn.Support() == Support())) Fail(ErrorKind::kContract, "components must share a support");
    if (!(c.branch.Tables() == Tables())) {
      Fail(ErrorKind::kContract, "components must share branch tables");
    }
  }
  if (Support().TaxonCount() != taxa_.Size()) Fail(ErrorKind::kTaxonSet, "support taxon count mismatch");
}

MixtureApprox MixtureApprox::FromTrees(TaxonSet taxa, std::span<const Topology> trees, size_t S,
                                       BranchMode mode) {
  if (S == 0) Fail(ErrorKind::kContract, "mixture needs at least one component");
  auto support = std::make_shared<const SBNSupport>(SBNSupport::Build(taxa.Size(), trees));
  auto tables = std::make_shared<const BranchTables>(BranchTables::Build(taxa.Size(), trees));
  auto logits = support->FrequencyLogits(trees);
  std::vector<Component> components;
  for (size_t s = 0; s < S; ++s) {
    components.push_back({SBN(support, logits), BranchModel(tables, mode)});
  }
  return MixtureApprox(std::move(taxa), std::move(components));
}

double MixtureApprox::LogProb(const Topology& t) const {
  RootingIndex index = Support().Index(t);
  if (index.Empty()) Fail(ErrorKind::kSupportViolation, "tree outside mixture support");
  std::vector<double> terms;
  for (const auto& c : components_) terms.push_back(c.sbn.LogProb(index));
  return LogSumExp(terms) - std::log(double(Size()));
}

double MixtureApprox::LogJoint(const Topology& t, const BranchLengths& branches) const {
  RootingIndex index = Support().Index(t);
  if (index.Empty()) Fail(ErrorKind::kSupportViolation, "tree outside mixture support");
  EdgeIndex edges = Tables().Index(t);
  std::vector<double> terms;
  for (const auto& c : components_) {
    terms.push_back(c.sbn.LogProb(index) + c.branch.LogDensity(edges, branches));
  }
  return LogSumExp(terms) - std::log(double(Size()));
}

}  // namespace vbpi
