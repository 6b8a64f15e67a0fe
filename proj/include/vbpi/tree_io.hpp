#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vbpi/newick.hpp"

namespace vbpi {

// Candidate trees for SBN support; duplicates are kept so they can weight counts.
struct CandidateTreeSet {
  TaxonSet taxa;
  std::vector<Topology> trees;
};

// One Newick tree per line; blank lines are skipped and rooted trees are unrooted.
CandidateTreeSet ReadTreeList(std::istream& in, const TaxonSet& taxa);
CandidateTreeSet ReadTreeListFile(const std::string& path, const TaxonSet& taxa);
// Taxon order taken from the leaves of the first tree in the file.
TaxonSet TaxaFromTreeListFile(const std::string& path);

struct ReferencePosterior {
  std::vector<Topology> topologies;
  std::vector<double> probabilities;
};

// Lines of `<newick>\t<probability>`.
ReferencePosterior ReadReferencePosterior(std::istream& in, const TaxonSet& taxa);
ReferencePosterior ReadReferencePosteriorFile(const std::string& path, const TaxonSet& taxa);
void WriteReferencePosterior(std::ostream& out, const ReferencePosterior& reference,
                             const TaxonSet& taxa);

}  // namespace vbpi
