#pragma once

#include <optional>
#include <vector>

#include "vbpi/clade.hpp"
#include "vbpi/rng.hpp"

namespace vbpi {

// One conditional decision of a rooted tree: `clade`, whose sister in the parent
// subsplit is `sister`, is partitioned into `child`. Only clades with three or more
// taxa produce records; smaller clades have a single possible partition.
struct SubsplitRecord {
  Clade sister;
  Clade clade;
  Subsplit child;

  Subsplit Parent() const { return Subsplit::Canonical(sister, clade); }
  bool operator==(const SubsplitRecord&) const = default;
  std::strong_ordering operator<=>(const SubsplitRecord&) const = default;
};

struct SubsplitDecomposition {
  Split root;
  std::vector<SubsplitRecord> records;
};

// A leaf-labeled binary tree in canonical form.
//
// Nodes 0..N-1 are the leaves (node id = taxon index); internal nodes are numbered
// N.. in post-order and the root is the last node. Children are ordered by the
// canonical clade order (leading clade first). Unrooted trees are stored rooted at the
// internal neighbor of taxon 0, which therefore has three children. Every non-root
// node names the edge to its parent. Two topologies are equal iff their canonical
// parent vectors are equal.
class Topology {
 public:
  Topology() = default;

  // Canonicalizes an undirected tree. Nodes 0..taxon_count-1 must be the leaves; the
  // remaining nodes are internal. Pass `root` (a degree-2 node) for a rooted tree.
  // `new_ids`, when given, receives the canonical id of every input node.
  static Topology FromAdjacency(size_t taxon_count,
                                const std::vector<std::vector<int>>& adjacency,
                                std::optional<int> root,
                                std::vector<int>* new_ids = nullptr);

  size_t TaxonCount() const { return taxon_count_; }
  size_t NodeCount() const { return parent_.size(); }
  bool IsRooted() const { return rooted_; }
  int Root() const { return int(parent_.size()) - 1; }
  int Parent(int node) const { return parent_[size_t(node)]; }
  const std::vector<int>& Children(int node) const { return children_[size_t(node)]; }
  const Clade& CladeOf(int node) const { return clades_[size_t(node)]; }
  bool IsLeaf(int node) const { return size_t(node) < taxon_count_; }
  std::vector<int> Neighbors(int node) const;
  // Post-order over all nodes; the root is last.
  std::vector<int> PostOrder() const;

  // Edge ids are the non-root nodes, ascending.
  std::vector<int> Edges() const;
  size_t EdgeCount() const { return parent_.empty() ? 0 : parent_.size() - 1; }
  Split SplitOfEdge(int edge) const;
  // Edge id whose split equals `split`; throws kMissingEdge when absent.
  int EdgeOfSplit(const Split& split) const;
  // One split per edge, in Edges() order. Requires an unrooted tree.
  std::vector<Split> Splits() const;
  // Sorted nontrivial splits; the identity key of an unrooted topology.
  std::vector<Split> NontrivialSplits() const;
  // PSPs neighboring an edge: one per non-leaf side of the edge's split.
  std::vector<PSP> PSPsOfEdge(int edge) const;

  Topology RootAtEdge(int edge) const;
  // One rooted tree per edge, in Edges() order.
  std::vector<Topology> AllRootings() const;
  Topology Unrooted() const;
  SubsplitDecomposition Decompose() const;
  // Decompose() applied to every rooting, in Edges() order, without building trees.
  std::vector<SubsplitDecomposition> RootingDecompositions() const;

  bool operator==(const Topology& o) const {
    return rooted_ == o.rooted_ && taxon_count_ == o.taxon_count_ && parent_ == o.parent_;
  }
  size_t Hash() const;

 private:
  std::vector<std::vector<int>> AdjacencyList() const;
  Clade AwayClade(int from, int to) const;
  void CheckUnrooted(const char* what) const;

  size_t taxon_count_ = 0;
  bool rooted_ = false;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<Clade> clades_;
};

struct TopologyHash {
  size_t operator()(const Topology& t) const { return t.Hash(); }
};

// All unrooted topologies on 3 <= N <= 8 taxa, generated by stepwise addition.
std::vector<Topology> EnumerateUnrooted(size_t taxon_count);
// Uniform draw over unrooted topologies (random stepwise addition).
Topology RandomUnrootedTopology(size_t taxon_count, Rng& rng);
// Applies one random nearest-neighbor interchange around an internal edge.
Topology RandomNNI(const Topology& unrooted, Rng& rng);

}  // namespace vbpi
