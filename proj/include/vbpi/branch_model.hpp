#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vbpi/newick.hpp"
#include "vbpi/rng.hpp"
#include "vbpi/topology.hpp"

namespace vbpi {

// Split and PSP parameter slots of a tree, one entry per edge in Edges() order.
// A PSP slot of -1 means that context has no parameter and contributes nothing.
struct EdgeIndex {
  std::vector<int> edges;
  std::vector<int> split;
  std::vector<std::array<int, 2>> psps;

  size_t Size() const { return edges.size(); }
};

// The global split and PSP tables shared by all branch models of a run.
class BranchTables {
 public:
  BranchTables() = default;
  BranchTables(size_t taxon_count, std::vector<Split> splits, std::vector<PSP> psps);
  // Every split and PSP of every (unrooted) tree.
  static BranchTables Build(size_t taxon_count, std::span<const Topology> trees);

  size_t TaxonCount() const { return taxon_count_; }
  const std::vector<Split>& Splits() const { return splits_; }
  const std::vector<PSP>& PSPs() const { return psps_; }
  std::optional<size_t> SplitIndex(const Split& split) const;
  std::optional<size_t> PSPIndex(const PSP& psp) const;

  // Throws kSupportViolation when an edge's split has no parameter.
  EdgeIndex Index(const Topology& unrooted) const;

  bool operator==(const BranchTables& o) const {
    return taxon_count_ == o.taxon_count_ && splits_ == o.splits_ && psps_ == o.psps_;
  }

 private:
  size_t taxon_count_ = 0;
  std::vector<Split> splits_;
  std::vector<PSP> psps_;
  std::unordered_map<Split, size_t, SubsplitHash> split_index_;
  std::unordered_map<PSP, size_t, PSPHash> psp_index_;
};

enum class BranchMode { kSplit, kSplitPSP };

struct BranchSample {
  BranchLengths branches;    // indexed by node id
  std::vector<double> eps;   // one standard normal draw per edge, EdgeIndex order
};

// Diagonal LogNormal q(B | tree) with
//   mu(e)    = psi_mu[e's split]    + sum of gamma_mu over e's PSPs
//   sigma(e) = softplus(psi_sigma[e's split] + sum of gamma_sigma over e's PSPs).
//
// Parameters are one flat vector: psi_mu, psi_sigma (one per split), then gamma_mu,
// gamma_sigma (one per PSP, only in kSplitPSP mode).
class BranchModel {
 public:
  static constexpr double kInitMedian = 0.1;
  static constexpr double kInitSigma = 0.25;

  BranchModel() = default;
  BranchModel(std::shared_ptr<const BranchTables> tables, BranchMode mode);
  BranchModel(std::shared_ptr<const BranchTables> tables, BranchMode mode,
              std::vector<double> params);

  const BranchTables& Tables() const { return *tables_; }
  const std::shared_ptr<const BranchTables>& TablesPtr() const { return tables_; }
  BranchMode Mode() const { return mode_; }
  const std::vector<double>& Params() const { return params_; }
  void SetParams(std::vector<double> params);
  static size_t ParameterCount(const BranchTables& tables, BranchMode mode);

  EdgeIndex Index(const Topology& unrooted) const { return tables_->Index(unrooted); }

  // (mu, sigma) of the i-th edge of an index.
  std::pair<double, double> EdgeParams(const EdgeIndex& index, size_t i) const;
  std::pair<double, double> EdgeParams(const Topology& unrooted, int edge) const;

  BranchSample Sample(const Topology& unrooted, const EdgeIndex& index, Rng& rng) const;
  // Branches from given standard normal draws.
  BranchLengths Transform(const Topology& unrooted, const EdgeIndex& index,
                          std::span<const double> eps) const;

  // Throws kDomain for nonpositive or non-finite branch lengths.
  double LogDensity(const EdgeIndex& index, const BranchLengths& branches) const;
  double LogDensity(const Topology& unrooted, const BranchLengths& branches) const;
  // d log q / d b(e), per edge in index order.
  std::vector<double> GradLogDensityBranches(const EdgeIndex& index,
                                             const BranchLengths& branches) const;

  // Adds scale * sum_e dlogf_db[e] * d b(e) / d params, with b(e) = exp(mu + sigma eps).
  void AccumulateGradParams(const EdgeIndex& index, std::span<const double> eps,
                            const BranchLengths& branches, std::span<const double> dlogf_db,
                            double scale, std::span<double> grad) const;
  // Adds scale * d log q(B | tree) / d params at fixed B.
  void AccumulateGradLogDensity(const EdgeIndex& index, const BranchLengths& branches,
                                double scale, std::span<double> grad) const;

 private:
  // Adds (d_mu, d_sigma_raw) to the parameters feeding edge i.
  void Scatter(const EdgeIndex& index, size_t i, double d_mu, double d_raw,
               std::span<double> grad) const;
  double RawSigma(const EdgeIndex& index, size_t i) const;

  std::shared_ptr<const BranchTables> tables_;
  BranchMode mode_ = BranchMode::kSplit;
  std::vector<double> params_;
};

}  // namespace vbpi
