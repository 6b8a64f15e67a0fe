#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vbpi/alignment.hpp"
#include "vbpi/likelihood.hpp"
#include "vbpi/mixture.hpp"
#include "vbpi/newick.hpp"
#include "vbpi/taxon_set.hpp"

namespace testutil {

// Taxa named A, B, C, ... (then t26, t27, ...).
inline vbpi::TaxonSet Letters(size_t n) {
  std::vector<std::string> names;
  for (size_t i = 0; i < n; ++i) {
    names.push_back(i < 26 ? std::string(1, char('A' + i)) : "t" + std::to_string(i));
  }
  return vbpi::TaxonSet(names);
}

inline vbpi::Topology Tree(const std::string& newick, const vbpi::TaxonSet& taxa) {
  return vbpi::ParseNewick(newick, taxa).topology;
}

inline vbpi::Clade C(const std::string& bits) { return vbpi::Clade::FromBitString(bits); }

// max |a - b| / max(max |b|, floor).
inline double RelativeError(const std::vector<double>& a, const std::vector<double>& b,
                            double floor = 1e-8) {
  double diff = 0.0, scale = floor;
  for (size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

inline std::vector<double> Normals(size_t n, uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

// JC69 data simulated on a random unrooted tree with Exp(10) branch lengths.
inline vbpi::Alignment Simulated(size_t n, size_t sites, uint64_t seed) {
  vbpi::Rng rng(seed);
  vbpi::Topology t = vbpi::RandomUnrootedTopology(n, rng);
  vbpi::BranchLengths b(t.NodeCount(), 0.0);
  std::exponential_distribution<double> exp10(10.0);
  for (int e : t.Edges()) b[size_t(e)] = exp10(rng);
  return vbpi::Alignment{Letters(n), vbpi::SimulateJC69(t, b, sites, rng)};
}

// S components over all topologies of n taxa with random parameters.
inline vbpi::MixtureApprox RandomMixture(size_t n, size_t S, vbpi::BranchMode mode,
                                         uint64_t seed, double scale = 0.3) {
  auto trees = vbpi::EnumerateUnrooted(n);
  auto m = vbpi::MixtureApprox::FromTrees(Letters(n), trees, S, mode);
  for (size_t j = 0; j < S; ++j) {
    m[j].sbn.SetLogits(Normals(m[j].sbn.Logits().size(), seed + 10 * j, 0.5));
    auto p = m[j].branch.Params();
    auto noise = Normals(p.size(), seed + 10 * j + 1, scale);
    for (size_t i = 0; i < p.size(); ++i) p[i] += noise[i];
    m[j].branch.SetParams(p);
  }
  return m;
}

}  // namespace testutil
