#pragma once

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "vbpi/rng.hpp"
#include "vbpi/topology.hpp"

namespace vbpi {

// Parameter indices used by each representable rooting of a topology. The first
// index of every rooting is its root split; the rest are its subsplit records.
struct RootingIndex {
  std::vector<std::vector<int>> rootings;
  // Number of rootings the topology has, including unrepresentable ones.
  size_t total_rootings = 0;

  bool Empty() const { return rootings.empty(); }
};

// The conditional probability table layout of a subsplit Bayesian network.
//
// Table 0 holds the root splits. Every other table is keyed by a parent context
// (sister clade, clade) and lists the subsplits of `clade` seen in that context.
// Parameters are laid out table by table, so each table is a contiguous range.
class SBNSupport {
 public:
  struct Table {
    Clade sister;
    Clade clade;
    size_t begin = 0;
    size_t end = 0;
  };

  SBNSupport() = default;

  // Unrooted trees contribute every rooting; rooted trees contribute only their own.
  static SBNSupport Build(size_t taxon_count, std::span<const Topology> trees);
  // Rebuilds from explicit tables (root splits, then (sister, clade, children)).
  struct TableSpec {
    Clade sister;
    Clade clade;
    std::vector<Subsplit> children;
  };
  static SBNSupport FromTables(size_t taxon_count, std::vector<Split> root_splits,
                               std::vector<TableSpec> tables);

  size_t TaxonCount() const { return taxon_count_; }
  size_t ParameterCount() const { return entries_.size(); }
  size_t RootSplitCount() const { return tables_.empty() ? 0 : tables_[0].end; }
  const std::vector<Table>& Tables() const { return tables_; }
  size_t TableOf(size_t param) const { return table_of_[param]; }
  // Root split (table 0) or child subsplit of a parameter.
  const Subsplit& Entry(size_t param) const { return entries_[param]; }

  std::optional<size_t> RootIndex(const Split& split) const;
  std::optional<size_t> TableIndex(const Clade& sister, const Clade& clade) const;
  std::optional<size_t> RecordIndex(const SubsplitRecord& record) const;

  // Indices of `t`'s rootings (all rootings when unrooted, the one rooting when
  // rooted). Rootings with any out-of-support decision are omitted.
  RootingIndex Index(const Topology& t) const;

  // log(count + pseudocount) per parameter, counting every rooting of every tree
  // (duplicates included).
  std::vector<double> FrequencyLogits(std::span<const Topology> trees,
                                      double pseudocount = 1.0) const;

  bool operator==(const SBNSupport& o) const {
    return taxon_count_ == o.taxon_count_ && entries_ == o.entries_ && table_keys_ == o.table_keys_;
  }

 private:
  struct PairHash {
    size_t operator()(const std::pair<Clade, Clade>& p) const {
      return p.first.Hash() * 1000003 ^ p.second.Hash();
    }
  };
  struct TripleKey {
    Clade sister, clade, first;
    bool operator==(const TripleKey&) const = default;
  };
  struct TripleHash {
    size_t operator()(const TripleKey& k) const {
      return (k.sister.Hash() * 1000003 ^ k.clade.Hash()) * 1000003 ^ k.first.Hash();
    }
  };

  std::vector<int> IndexDecomposition(const SubsplitDecomposition& d) const;

  size_t taxon_count_ = 0;
  std::vector<Table> tables_;
  std::vector<std::pair<Clade, Clade>> table_keys_;
  std::vector<Subsplit> entries_;
  std::vector<size_t> table_of_;
  std::unordered_map<Subsplit, size_t, SubsplitHash> root_index_;
  std::unordered_map<std::pair<Clade, Clade>, size_t, PairHash> table_index_;
  std::unordered_map<TripleKey, size_t, TripleHash> record_index_;
};

// A distribution over tree topologies: per-table softmax over unconstrained logits.
//
// Unrooted probabilities sum over all rootings. Evaluation and sampling are const and
// safe to run concurrently; SetLogits is the single-writer update between steps.
class SBN {
 public:
  SBN() = default;
  SBN(std::shared_ptr<const SBNSupport> support, std::vector<double> logits);

  const SBNSupport& Support() const { return *support_; }
  const std::shared_ptr<const SBNSupport>& SupportPtr() const { return support_; }
  const std::vector<double>& Logits() const { return logits_; }
  const std::vector<double>& LogProbs() const { return log_probs_; }
  void SetLogits(std::vector<double> logits);

  // Throws kSupportViolation when some decision is outside the support.
  double LogProbRooted(const Topology& rooted) const;
  // Rooting-sum log probability for unrooted trees, LogProbRooted for rooted ones.
  // Throws kSupportViolation only when no rooting is representable.
  double LogProb(const Topology& t) const;
  // -inf when the index is empty.
  double LogProb(const RootingIndex& index) const;

  // Adds scale * d log q(t) / d logits into `grad`.
  void AccumulateGradLogProb(const RootingIndex& index, double scale,
                             std::span<double> grad) const;
  std::vector<double> GradLogProb(const Topology& t) const;

  Topology SampleRooted(Rng& rng) const;
  Topology Sample(Rng& rng) const;

 private:
  size_t SampleFromTable(size_t table, Rng& rng) const;

  std::shared_ptr<const SBNSupport> support_;
  std::vector<double> logits_;
  std::vector<double> log_probs_;
};

}  // namespace vbpi
