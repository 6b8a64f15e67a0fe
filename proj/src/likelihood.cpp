#include "vbpi/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "vbpi/error.hpp"
#include "vbpi/numerics.hpp"

namespace vbpi {

namespace {

constexpr double kStationary = 0.25;

// Length of the edge joining adjacent nodes a and b.
double EdgeLength(const Topology& t, const BranchLengths& branches, int a, int b) {
  return t.Parent(a) == b ? branches[size_t(a)] : branches[size_t(b)];
}

void LeafPartial(uint8_t mask, double* out) {
  for (int s = 0; s < 4; ++s) out[s] = (mask >> s) & 1 ? 1.0 : 0.0;
}

// out[y] = sum_x P[y][x] in[x]
void Propagate(const Matrix4& p, const double* in, double* out) {
  for (int y = 0; y < 4; ++y) {
    out[y] = p[4 * y] * in[0] + p[4 * y + 1] * in[1] + p[4 * y + 2] * in[2] + p[4 * y + 3] * in[3];
  }
}

double Rescale(double* v) {
  double max = std::max({v[0], v[1], v[2], v[3]});
  if (max <= 0.0) return 0.0;
  for (int s = 0; s < 4; ++s) v[s] /= max;
  return std::log(max);
}

}  // namespace

Matrix4 JC69Transition(double t) {
  if (!(t >= 0.0)) Fail(ErrorKind::kDomain, "branch length must be nonnegative");
  double e = std::exp(-4.0 * t / 3.0);
  double diag = 0.25 + 0.75 * e, off = 0.25 - 0.25 * e;
  Matrix4 m;
  for (int i = 0; i < 16; ++i) m[size_t(i)] = (i % 5 == 0) ? diag : off;
  return m;
}

Matrix4 JC69TransitionDerivative(double t) {
  if (!(t >= 0.0)) Fail(ErrorKind::kDomain, "branch length must be nonnegative");
  double e = std::exp(-4.0 * t / 3.0);
  Matrix4 m;
  for (int i = 0; i < 16; ++i) m[size_t(i)] = (i % 5 == 0) ? -e : e / 3.0;
  return m;
}

double LogPrior(const Topology& t, const BranchLengths& branches, const PriorConfig& config) {
  if (!(config.branch_rate > 0.0)) Fail(ErrorKind::kDomain, "branch rate must be positive");
  const double log_rate = std::log(config.branch_rate);
  double total = 0.0;
  for (int e : t.Edges()) {
    double b = branches.at(size_t(e));
    if (!(b > 0.0)) Fail(ErrorKind::kDomain, "branch length must be positive");
    total += log_rate - config.branch_rate * b;
  }
  if (config.include_topology_constant && t.TaxonCount() >= 3) {
    total -= LogUnrootedTopologyCount(t.TaxonCount());
  }
  return total;
}

PhyloLikelihood::PhyloLikelihood(const Alignment& alignment)
    : patterns_(CompressPatterns(alignment)) {}

PhyloLikelihood::PhyloLikelihood(SitePatterns patterns) : patterns_(std::move(patterns)) {}

void PhyloLikelihood::CheckInputs(const Topology& t, const BranchLengths& branches) const {
  if (t.TaxonCount() != patterns_.taxon_count) {
    Fail(ErrorKind::kTaxonSet, "tree and alignment taxon counts differ");
  }
  if (branches.size() != t.NodeCount()) Fail(ErrorKind::kContract, "missing branch lengths");
  for (int e : t.Edges()) {
    double b = branches[size_t(e)];
    if (std::isnan(b)) Fail(ErrorKind::kContract, "missing branch length");
    if (b < 0.0 || !std::isfinite(b)) Fail(ErrorKind::kDomain, "invalid branch length");
  }
}

double PhyloLikelihood::LogLikelihood(const Topology& t, const BranchLengths& branches) const {
  return LogLikelihood(t, branches, t.Root());
}

double PhyloLikelihood::LogLikelihood(const Topology& t, const BranchLengths& branches,
                                      int traversal_root) const {
  CheckInputs(t, branches);
  if (traversal_root < 0 || size_t(traversal_root) >= t.NodeCount()) {
    Fail(ErrorKind::kContract, "traversal root out of range");
  }
  const size_t n_nodes = t.NodeCount(), n_patterns = patterns_.PatternCount();

  // Orient the tree away from the traversal root.
  std::vector<int> order, from(n_nodes, -1);
  std::vector<std::vector<int>> neighbors(n_nodes);
  for (size_t v = 0; v < n_nodes; ++v) neighbors[v] = t.Neighbors(int(v));
  order.push_back(traversal_root);
  for (size_t i = 0; i < order.size(); ++i) {
    int v = order[i];
    for (int w : neighbors[size_t(v)]) {
      if (w != from[size_t(v)]) {
        from[size_t(w)] = v;
        order.push_back(w);
      }
    }
  }

  std::vector<double> partial(n_nodes * n_patterns * 4);
  std::vector<double> scale(n_patterns, 0.0);
  double message[4];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    double* pv = &partial[size_t(v) * n_patterns * 4];
    for (size_t p = 0; p < n_patterns; ++p) {
      if (t.IsLeaf(v)) {
        LeafPartial(patterns_.Mask(p, size_t(v)), pv + 4 * p);
      } else {
        std::fill(pv + 4 * p, pv + 4 * p + 4, 1.0);
      }
    }
    for (int w : neighbors[size_t(v)]) {
      if (w == from[size_t(v)]) continue;
      const Matrix4 m = JC69Transition(EdgeLength(t, branches, v, w));
      const double* pw = &partial[size_t(w) * n_patterns * 4];
      for (size_t p = 0; p < n_patterns; ++p) {
        Propagate(m, pw + 4 * p, message);
        for (int s = 0; s < 4; ++s) pv[4 * p + size_t(s)] *= message[s];
      }
    }
    if (v != traversal_root && !t.IsLeaf(v)) {
      for (size_t p = 0; p < n_patterns; ++p) scale[p] += Rescale(pv + 4 * p);
    }
  }

  const double* pr = &partial[size_t(traversal_root) * n_patterns * 4];
  double total = 0.0;
  for (size_t p = 0; p < n_patterns; ++p) {
    double site = kStationary * (pr[4 * p] + pr[4 * p + 1] + pr[4 * p + 2] + pr[4 * p + 3]);
    total += patterns_.weights[p] * (std::log(site) + scale[p]);
  }
  return total;
}

double PhyloLikelihood::LogLikelihoodWithGradient(const Topology& t, const BranchLengths& branches,
                                                  std::vector<double>& grad) const {
  CheckInputs(t, branches);
  const size_t n_nodes = t.NodeCount(), n_patterns = patterns_.PatternCount();
  const size_t stride = n_patterns * 4;
  const std::vector<int> post = t.PostOrder();
  const int root = t.Root();

  std::vector<Matrix4> transition(n_nodes);
  for (int e : t.Edges()) transition[size_t(e)] = JC69Transition(branches[size_t(e)]);

  // Lower partials and the messages they send upward.
  std::vector<double> lower(n_nodes * stride), up(n_nodes * stride);
  std::vector<double> scale(n_patterns, 0.0);
  for (int v : post) {
    double* lv = &lower[size_t(v) * stride];
    if (t.IsLeaf(v)) {
      for (size_t p = 0; p < n_patterns; ++p) LeafPartial(patterns_.Mask(p, size_t(v)), lv + 4 * p);
    } else {
      std::fill(lv, lv + stride, 1.0);
      for (int c : t.Children(v)) {
        const double* mc = &up[size_t(c) * stride];
        for (size_t i = 0; i < stride; ++i) lv[i] *= mc[i];
      }
      if (v != root) {
        for (size_t p = 0; p < n_patterns; ++p) scale[p] += Rescale(lv + 4 * p);
      }
    }
    if (v != root) {
      double* mv = &up[size_t(v) * stride];
      for (size_t p = 0; p < n_patterns; ++p) Propagate(transition[size_t(v)], lv + 4 * p, mv + 4 * p);
    }
  }

  double total = 0.0;
  const double* lr = &lower[size_t(root) * stride];
  for (size_t p = 0; p < n_patterns; ++p) {
    double site = kStationary * (lr[4 * p] + lr[4 * p + 1] + lr[4 * p + 2] + lr[4 * p + 3]);
    total += patterns_.weights[p] * (std::log(site) + scale[p]);
  }

  // outside[v](y): everything outside v's subtree given state y at v's parent.
  // down[v](y): everything outside v's subtree given state y at v. Both are rescaled
  // freely because only per-site ratios are used.
  grad.assign(n_nodes, 0.0);
  std::vector<double> down(n_nodes * stride), outside(stride);
  std::fill(&down[size_t(root) * stride], &down[size_t(root) * stride] + stride, kStationary);
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    const int v = *it;
    if (t.IsLeaf(v)) continue;
    const double* dv = &down[size_t(v) * stride];
    const auto& children = t.Children(v);
    for (int c : children) {
      std::copy(dv, dv + stride, outside.begin());
      for (int s : children) {
        if (s == c) continue;
        const double* ms = &up[size_t(s) * stride];
        for (size_t i = 0; i < stride; ++i) outside[i] *= ms[i];
      }
      const Matrix4 dp = JC69TransitionDerivative(branches[size_t(c)]);
      const double* lc = &lower[size_t(c) * stride];
      const double* mc = &up[size_t(c) * stride];
      double* dc = &down[size_t(c) * stride];
      double g = 0.0, deriv[4];
      for (size_t p = 0; p < n_patterns; ++p) {
        const double* o = &outside[4 * p];
        Propagate(dp, lc + 4 * p, deriv);
        double num = 0.0, den = 0.0;
        for (int y = 0; y < 4; ++y) {
          num += o[y] * deriv[y];
          den += o[y] * mc[4 * p + size_t(y)];
        }
        g += patterns_.weights[p] * num / den;
        if (!t.IsLeaf(c)) {
          Propagate(transition[size_t(c)], o, dc + 4 * p);
          Rescale(dc + 4 * p);
        }
      }
      grad[size_t(c)] = g;
    }
  }
  return total;
}

std::vector<std::string> SimulateJC69(const Topology& t, const BranchLengths& branches,
                                      size_t site_count, Rng& rng) {
  const size_t n_nodes = t.NodeCount();
  std::vector<std::vector<int>> states(n_nodes, std::vector<int>(site_count));
  std::uniform_int_distribution<int> uniform_state(0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto post = t.PostOrder();
  for (size_t m = 0; m < site_count; ++m) states[size_t(t.Root())][m] = uniform_state(rng);
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    int v = *it;
    if (v == t.Root()) continue;
    const Matrix4 p = JC69Transition(branches.at(size_t(v)));
    const auto& parent = states[size_t(t.Parent(v))];
    auto& own = states[size_t(v)];
    for (size_t m = 0; m < site_count; ++m) {
      double u = unit(rng), acc = 0.0;
      int x = 3;
      for (int y = 0; y < 4; ++y) {
        acc += p[size_t(4 * parent[m] + y)];
        if (u < acc) {
          x = y;
          break;
        }
      }
      own[m] = x;
    }
  }
  std::vector<std::string> rows(t.TaxonCount(), std::string(site_count, 'A'));
  for (size_t leaf = 0; leaf < t.TaxonCount(); ++leaf) {
    for (size_t m = 0; m < site_count; ++m) rows[leaf][m] = kNucleotides[states[leaf][m]];
  }
  return rows;
}

}  // namespace vbpi
