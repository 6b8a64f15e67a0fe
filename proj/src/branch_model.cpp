#include "vbpi/branch_model.hpp"

#include <cmath>
#include <set>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

BranchTables::BranchTables(size_t taxon_count, std::vector<Split> splits, std::vector<PSP> psps)
    : taxon_count_(taxon_count), splits_(std::move(splits)), psps_(std::move(psps)) {
  for (size_t i = 0; i < splits_.size(); ++i) {
    if (!split_index_.emplace(splits_[i], i).second) Fail(ErrorKind::kDuplicate, "duplicate split");
  }
  for (size_t i = 0; i < psps_.size(); ++i) {
    if (!psp_index_.emplace(psps_[i], i).second) Fail(ErrorKind::kDuplicate, "duplicate PSP");
  }
}

BranchTables BranchTables::Build(size_t taxon_count, std::span<const Topology> trees) {
  if (trees.empty()) Fail(ErrorKind::kEmptyInput, "branch tables need at least one tree");
  std::set<Split> splits;
  std::set<PSP> psps;
  for (const auto& tree : trees) {
    if (tree.TaxonCount() != taxon_count) Fail(ErrorKind::kTaxonSet, "tree taxon count mismatch");
    const Topology t = tree.IsRooted() ? tree.Unrooted() : tree;
    for (int e : t.Edges()) {
      splits.insert(t.SplitOfEdge(e));
      for (const auto& psp : t.PSPsOfEdge(e)) psps.insert(psp);
    }
  }
  return BranchTables(taxon_count, {splits.begin(), splits.end()}, {psps.begin(), psps.end()});
}

std::optional<size_t> BranchTables::SplitIndex(const Split& split) const {
  auto it = split_index_.find(split);
  if (it == split_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> BranchTables::PSPIndex(const PSP& psp) const {
  auto it = psp_index_.find(psp);
  if (it == psp_index_.end()) return std::nullopt;
  return it->second;
}

EdgeIndex BranchTables::Index(const Topology& t) const {
  if (t.IsRooted()) Fail(ErrorKind::kWrongRootedness, "branch models act on unrooted trees");
  if (t.TaxonCount() != taxon_count_) Fail(ErrorKind::kTaxonSet, "tree taxon count mismatch");
  EdgeIndex index;
  index.edges = t.Edges();
  for (int e : index.edges) {
    Split split = t.SplitOfEdge(e);
    auto s = SplitIndex(split);
    if (!s) Fail(ErrorKind::kSupportViolation, "split " + split.ToString(taxon_count_) +
                                                   " has no branch parameters");
    index.split.push_back(int(*s));
    std::array<int, 2> slots{-1, -1};
    auto psps = t.PSPsOfEdge(e);
    for (size_t j = 0; j < psps.size(); ++j) {
      auto p = PSPIndex(psps[j]);
      slots[j] = p ? int(*p) : -1;
    }
    index.psps.push_back(slots);
  }
  return index;
}

size_t BranchModel::ParameterCount(const BranchTables& tables, BranchMode mode) {
  return 2 * tables.Splits().size() + (mode == BranchMode::kSplitPSP ? 2 * tables.PSPs().size() : 0);
}

BranchModel::BranchModel(std::shared_ptr<const BranchTables> tables, BranchMode mode)
    : tables_(std::move(tables)), mode_(mode) {
  params_.assign(ParameterCount(*tables_, mode_), 0.0);
  const size_t n = tables_->Splits().size();
  for (size_t i = 0; i < n; ++i) {
    params_[i] = std::log(kInitMedian);
    params_[n + i] = SoftplusInverse(kInitSigma);
  }
}

BranchModel::BranchModel(std::shared_ptr<const BranchTables> tables, BranchMode mode,
                         std::vector<double> params)
    : tables_(std::move(tables)), mode_(mode) {
  SetParams(std::move(params));
}

void BranchModel::SetParams(std::vector<double> params) {
  if (params.size() != ParameterCount(*tables_, mode_)) {
    Fail(ErrorKind::kContract, "branch parameter count does not match tables");
  }
  params_ = std::move(params);
}

double BranchModel::RawSigma(const EdgeIndex& index, size_t i) const {
  const size_t n = tables_->Splits().size();
  double raw = params_[n + size_t(index.split[i])];
  if (mode_ == BranchMode::kSplitPSP) {
    const size_t base = 2 * n + tables_->PSPs().size();
    for (int p : index.psps[i]) {
      if (p >= 0) raw += params_[base + size_t(p)];
    }
  }
  return raw;
}

std::pair<double, double> BranchModel::EdgeParams(const EdgeIndex& index, size_t i) const {
  double mu = params_[size_t(index.split[i])];
  if (mode_ == BranchMode::kSplitPSP) {
    const size_t base = 2 * tables_->Splits().size();
    for (int p : index.psps[i]) {
      if (p >= 0) mu += params_[base + size_t(p)];
    }
  }
  return {mu, Softplus(RawSigma(index, i))};
}

std::pair<double, double> BranchModel::EdgeParams(const Topology& t, int edge) const {
  EdgeIndex index = Index(t);
  for (size_t i = 0; i < index.Size(); ++i) {
    if (index.edges[i] == edge) return EdgeParams(index, i);
  }
  Fail(ErrorKind::kMissingEdge, "no edge " + std::to_string(edge));
}

BranchLengths BranchModel::Transform(const Topology& t, const EdgeIndex& index,
                                     std::span<const double> eps) const {
  if (eps.size() != index.Size()) Fail(ErrorKind::kContract, "eps count does not match edges");
  BranchLengths branches(t.NodeCount(), 0.0);
  for (size_t i = 0; i < index.Size(); ++i) {
    auto [mu, sigma] = EdgeParams(index, i);
    branches[size_t(index.edges[i])] = std::exp(mu + sigma * eps[i]);
  }
  return branches;
}

BranchSample BranchModel::Sample(const Topology& t, const EdgeIndex& index, Rng& rng) const {
  BranchSample sample;
  std::normal_distribution<double> normal(0.0, 1.0);
  sample.eps.resize(index.Size());
  for (double& e : sample.eps) e = normal(rng);
  sample.branches = Transform(t, index, sample.eps);
  return sample;
}

double BranchModel::LogDensity(const EdgeIndex& index, const BranchLengths& branches) const {
  double total = 0.0;
  for (size_t i = 0; i < index.Size(); ++i) {
    double b = branches.at(size_t(index.edges[i]));
    if (!(b > 0.0) || !std::isfinite(b)) Fail(ErrorKind::kDomain, "branch length must be positive");
    auto [mu, sigma] = EdgeParams(index, i);
    double z = (std::log(b) - mu) / sigma;
    total += -std::log(b) - std::log(sigma) - kHalfLog2Pi - 0.5 * z * z;
  }
  return total;
}

double BranchModel::LogDensity(const Topology& t, const BranchLengths& branches) const {
  return LogDensity(Index(t), branches);
}

std::vector<double> BranchModel::GradLogDensityBranches(const EdgeIndex& index,
                                                        const BranchLengths& branches) const {
  std::vector<double> grad(index.Size());
  for (size_t i = 0; i < index.Size(); ++i) {
    double b = branches[size_t(index.edges[i])];
    auto [mu, sigma] = EdgeParams(index, i);
    grad[i] = -(1.0 + (std::log(b) - mu) / (sigma * sigma)) / b;
  }
  return grad;
}

void BranchModel::Scatter(const EdgeIndex& index, size_t i, double d_mu, double d_raw,
                          std::span<double> grad) const {
  const size_t n = tables_->Splits().size();
  grad[size_t(index.split[i])] += d_mu;
  grad[n + size_t(index.split[i])] += d_raw;
  if (mode_ == BranchMode::kSplitPSP) {
    const size_t m = tables_->PSPs().size();
    for (int p : index.psps[i]) {
      if (p < 0) continue;
      grad[2 * n + size_t(p)] += d_mu;
      grad[2 * n + m + size_t(p)] += d_raw;
    }
  }
}

void BranchModel::AccumulateGradParams(const EdgeIndex& index, std::span<const double> eps,
                                       const BranchLengths& branches,
                                       std::span<const double> dlogf_db, double scale,
                                       std::span<double> grad) const {
  if (eps.size() != index.Size() || dlogf_db.size() != index.Size() ||
      grad.size() != params_.size()) {
    Fail(ErrorKind::kContract, "gradient shape mismatch");
  }
  for (size_t i = 0; i < index.Size(); ++i) {
    double b = branches[size_t(index.edges[i])];
    double g = scale * dlogf_db[i] * b;
    Scatter(index, i, g, g * eps[i] * Sigmoid(RawSigma(index, i)), grad);
  }
}

void BranchModel::AccumulateGradLogDensity(const EdgeIndex& index, const BranchLengths& branches,
                                           double scale, std::span<double> grad) const {
  if (grad.size() != params_.size()) Fail(ErrorKind::kContract, "gradient shape mismatch");
  for (size_t i = 0; i < index.Size(); ++i) {
    double b = branches[size_t(index.edges[i])];
    auto [mu, sigma] = EdgeParams(index, i);
    double z = (std::log(b) - mu) / sigma;
    double d_mu = z / sigma;
    double d_sigma = (z * z - 1.0) / sigma;
    Scatter(index, i, scale * d_mu, scale * d_sigma * Sigmoid(RawSigma(index, i)), grad);
  }
}

}  // namespace vbpi
