#include "vbpi/sbn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

namespace {

std::vector<SubsplitDecomposition> DecompositionsOf(const Topology& t) {
  if (t.IsRooted()) return {t.Decompose()};
  return t.RootingDecompositions();
}

}  // namespace

SBNSupport SBNSupport::Build(size_t taxon_count, std::span<const Topology> trees) {
  if (trees.empty()) Fail(ErrorKind::kEmptyInput, "support needs at least one tree");
  std::set<Split> roots;
  std::map<std::pair<Clade, Clade>, std::set<Subsplit>> tables;
  std::unordered_map<Topology, bool, TopologyHash> seen;
  for (const auto& t : trees) {
    if (t.TaxonCount() != taxon_count) Fail(ErrorKind::kTaxonSet, "tree taxon count mismatch");
    if (!seen.emplace(t, true).second) continue;
    for (const auto& d : DecompositionsOf(t)) {
      roots.insert(d.root);
      for (const auto& r : d.records) tables[{r.sister, r.clade}].insert(r.child);
    }
  }
  std::vector<TableSpec> specs;
  for (const auto& [key, children] : tables) {
    specs.push_back({key.first, key.second, {children.begin(), children.end()}});
  }
  return FromTables(taxon_count, {roots.begin(), roots.end()}, std::move(specs));
}

SBNSupport SBNSupport::FromTables(size_t taxon_count, std::vector<Split> root_splits,
                                  std::vector<TableSpec> tables) {
  if (root_splits.empty()) Fail(ErrorKind::kContract, "support without root splits");
  SBNSupport s;
  s.taxon_count_ = taxon_count;
  const Clade full = Clade::Full(taxon_count);
  s.tables_.push_back({Clade(), Clade(), 0, root_splits.size()});
  s.table_keys_.emplace_back();
  for (const auto& split : root_splits) {
    if (split.Union() != full) Fail(ErrorKind::kInvalidClade, "root entry is not a split");
    if (!s.root_index_.emplace(split, s.entries_.size()).second) {
      Fail(ErrorKind::kDuplicate, "duplicate root split");
    }
    s.entries_.push_back(split);
    s.table_of_.push_back(0);
  }
  for (auto& spec : tables) {
    if (spec.children.empty()) Fail(ErrorKind::kContract, "empty conditional table");
    size_t table = s.tables_.size();
    if (!s.table_index_.emplace(std::pair{spec.sister, spec.clade}, table).second) {
      Fail(ErrorKind::kDuplicate, "duplicate conditional table");
    }
    s.tables_.push_back({spec.sister, spec.clade, s.entries_.size(),
                         s.entries_.size() + spec.children.size()});
    s.table_keys_.emplace_back(spec.sister, spec.clade);
    for (const auto& child : spec.children) {
      if (child.Union() != spec.clade) {
        Fail(ErrorKind::kInvalidClade, "child subsplit does not partition its clade");
      }
      if (!s.record_index_.emplace(TripleKey{spec.sister, spec.clade, child.First()},
                                   s.entries_.size()).second) {
        Fail(ErrorKind::kDuplicate, "duplicate child subsplit");
      }
      s.entries_.push_back(child);
      s.table_of_.push_back(table);
    }
  }
  return s;
}

std::optional<size_t> SBNSupport::RootIndex(const Split& split) const {
  auto it = root_index_.find(split);
  if (it == root_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> SBNSupport::TableIndex(const Clade& sister, const Clade& clade) const {
  auto it = table_index_.find({sister, clade});
  if (it == table_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> SBNSupport::RecordIndex(const SubsplitRecord& record) const {
  auto it = record_index_.find({record.sister, record.clade, record.child.First()});
  if (it == record_index_.end() || entries_[it->second] != record.child) return std::nullopt;
  return it->second;
}

std::vector<int> SBNSupport::IndexDecomposition(const SubsplitDecomposition& d) const {
  std::vector<int> indices;
  auto root = RootIndex(d.root);
  if (!root) return {};
  indices.reserve(d.records.size() + 1);
  indices.push_back(int(*root));
  for (const auto& r : d.records) {
    auto idx = RecordIndex(r);
    if (!idx) return {};
    indices.push_back(int(*idx));
  }
  return indices;
}

RootingIndex SBNSupport::Index(const Topology& t) const {
  if (t.TaxonCount() != taxon_count_) Fail(ErrorKind::kTaxonSet, "tree taxon count mismatch");
  RootingIndex index;
  auto decompositions = DecompositionsOf(t);
  index.total_rootings = decompositions.size();
  for (const auto& d : decompositions) {
    auto indices = IndexDecomposition(d);
    if (!indices.empty()) index.rootings.push_back(std::move(indices));
  }
  return index;
}

std::vector<double> SBNSupport::FrequencyLogits(std::span<const Topology> trees,
                                                double pseudocount) const {
  std::vector<double> counts(ParameterCount(), 0.0);
  for (const auto& t : trees) {
    for (const auto& rooting : Index(t).rootings) {
      for (int j : rooting) counts[size_t(j)] += 1.0;
    }
  }
  std::vector<double> logits(counts.size(), 0.0);
  for (size_t j = 0; j < counts.size(); ++j) {
    double c = counts[j] + pseudocount;
    logits[j] = c > 0 ? std::log(c) : 0.0;
  }
  return logits;
}

SBN::SBN(std::shared_ptr<const SBNSupport> support, std::vector<double> logits)
    : support_(std::move(support)) {
  SetLogits(std::move(logits));
}

void SBN::SetLogits(std::vector<double> logits) {
  if (logits.size() != support_->ParameterCount()) {
    Fail(ErrorKind::kContract, "logit count does not match support");
  }
  logits_ = std::move(logits);
  log_probs_ = logits_;
  for (const auto& table : support_->Tables()) {
    LogSoftmaxInPlace(std::span<double>(log_probs_).subspan(table.begin, table.end - table.begin));
  }
}

double SBN::LogProb(const RootingIndex& index) const {
  std::vector<double> per_rooting;
  per_rooting.reserve(index.rootings.size());
  for (const auto& rooting : index.rootings) {
    double lp = 0.0;
    for (int j : rooting) lp += log_probs_[size_t(j)];
    per_rooting.push_back(lp);
  }
  return LogSumExp(per_rooting);
}

double SBN::LogProbRooted(const Topology& rooted) const {
  if (!rooted.IsRooted()) Fail(ErrorKind::kWrongRootedness, "LogProbRooted needs a rooted tree");
  RootingIndex index = support_->Index(rooted);
  if (index.Empty()) Fail(ErrorKind::kSupportViolation, "rooted tree outside SBN support");
  return LogProb(index);
}

double SBN::LogProb(const Topology& t) const {
  RootingIndex index = support_->Index(t);
  if (index.Empty()) Fail(ErrorKind::kSupportViolation, "tree outside SBN support");
  return LogProb(index);
}

void SBN::AccumulateGradLogProb(const RootingIndex& index, double scale,
                                std::span<double> grad) const {
  if (index.Empty()) Fail(ErrorKind::kSupportViolation, "gradient of a zero-probability tree");
  std::vector<double> per_rooting;
  per_rooting.reserve(index.rootings.size());
  for (const auto& rooting : index.rootings) {
    double lp = 0.0;
    for (int j : rooting) lp += log_probs_[size_t(j)];
    per_rooting.push_back(lp);
  }
  const double total = LogSumExp(per_rooting);
  // Responsibility of each rooting times the softmax score of each touched table.
  std::vector<std::pair<size_t, double>> table_weights;
  for (size_t r = 0; r < index.rootings.size(); ++r) {
    double weight = scale * std::exp(per_rooting[r] - total);
    for (int j : index.rootings[r]) {
      grad[size_t(j)] += weight;
      table_weights.emplace_back(support_->TableOf(size_t(j)), weight);
    }
  }
  std::sort(table_weights.begin(), table_weights.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto& tables = support_->Tables();
  for (size_t i = 0; i < table_weights.size();) {
    size_t table = table_weights[i].first;
    double weight = 0.0;
    for (; i < table_weights.size() && table_weights[i].first == table; ++i) {
      weight += table_weights[i].second;
    }
    for (size_t j = tables[table].begin; j < tables[table].end; ++j) {
      grad[j] -= weight * std::exp(log_probs_[j]);
    }
  }
}

std::vector<double> SBN::GradLogProb(const Topology& t) const {
  std::vector<double> grad(logits_.size(), 0.0);
  AccumulateGradLogProb(support_->Index(t), 1.0, grad);
  return grad;
}

size_t SBN::SampleFromTable(size_t table, Rng& rng) const {
  const auto& range = support_->Tables()[table];
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (size_t j = range.begin; j < range.end; ++j) {
    acc += std::exp(log_probs_[j]);
    if (u < acc) return j;
  }
  return range.end - 1;
}

Topology SBN::SampleRooted(Rng& rng) const {
  const size_t n = support_->TaxonCount();
  std::vector<std::vector<int>> adjacency(n);
  auto new_node = [&]() {
    adjacency.emplace_back();
    return int(adjacency.size()) - 1;
  };
  auto link = [&](int a, int b) {
    adjacency[size_t(a)].push_back(b);
    adjacency[size_t(b)].push_back(a);
  };
  // Returns the node heading the subtree on `clade`.
  auto grow = [&](auto&& self, const Clade& clade, const Clade& sister) -> int {
    if (clade.Count() == 1) return int(clade.LowestTaxon());
    Subsplit child;
    if (clade.Count() == 2) {
      Clade first = Clade::Singleton(clade.LowestTaxon());
      child = Subsplit::Canonical(first, clade.Minus(first));
    } else {
      auto table = support_->TableIndex(sister, clade);
      if (!table) Fail(ErrorKind::kSupportViolation, "sampler reached a clade without a table");
      child = support_->Entry(SampleFromTable(*table, rng));
    }
    int node = new_node();
    link(node, self(self, child.First(), child.Second()));
    link(node, self(self, child.Second(), child.First()));
    return node;
  };
  const Split& root_split = support_->Entry(SampleFromTable(0, rng));
  int root = new_node();
  link(root, grow(grow, root_split.First(), root_split.Second()));
  link(root, grow(grow, root_split.Second(), root_split.First()));
  return Topology::FromAdjacency(n, adjacency, root);
}

Topology SBN::Sample(Rng& rng) const { return SampleRooted(rng).Unrooted(); }

}  // namespace vbpi
