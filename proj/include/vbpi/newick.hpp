#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vbpi/taxon_set.hpp"
#include "vbpi/topology.hpp"

namespace vbpi {

// Branch lengths indexed by node id of the associated topology; entry v is the length
// of the edge above v. The root entry is unused.
using BranchLengths = std::vector<double>;

struct ParsedTree {
  Topology topology;
  // Empty when the string carried no lengths; otherwise NaN marks a missing length.
  BranchLengths branch_lengths;
};

// Leaf names in the order they appear in a Newick string.
std::vector<std::string> NewickLeafNames(std::string_view newick);

// Parses one Newick tree over `taxa`. A top-level trifurcation is unrooted, a
// top-level bifurcation is rooted. Internal node labels are accepted and ignored.
ParsedTree ParseNewick(std::string_view newick, const TaxonSet& taxa);

// Serializes with lengths printed to 10 significant digits when `branch_lengths` is
// nonempty.
std::string ToNewick(const Topology& topology, const TaxonSet& taxa,
                     const BranchLengths& branch_lengths = {});

}  // namespace vbpi
