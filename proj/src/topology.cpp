#include "vbpi/topology.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

void RemoveNeighbor(std::vector<int>& list, int node) {
  auto it = std::find(list.begin(), list.end(), node);
  if (it != list.end()) list.erase(it);
}

// Splices a new internal node into the edge (a, b) and hangs `leaf` from it.
void InsertLeafOnEdge(std::vector<std::vector<int>>& adjacency, int a, int b, int leaf) {
  int mid = int(adjacency.size());
  adjacency.emplace_back();
  RemoveNeighbor(adjacency[size_t(a)], b);
  RemoveNeighbor(adjacency[size_t(b)], a);
  adjacency[size_t(a)].push_back(mid);
  adjacency[size_t(b)].push_back(mid);
  adjacency[size_t(leaf)].push_back(mid);
  adjacency[size_t(mid)] = {a, b, leaf};
}

std::vector<std::pair<int, int>> EdgePairs(const std::vector<std::vector<int>>& adjacency) {
  std::vector<std::pair<int, int>> edges;
  for (size_t u = 0; u < adjacency.size(); ++u) {
    for (int v : adjacency[u]) {
      if (int(u) < v) edges.emplace_back(int(u), v);
    }
  }
  return edges;
}

// Star on taxa 0, 1, 2 with the center at node `taxon_count`; leaves 3.. are unattached.
std::vector<std::vector<int>> StarAdjacency(size_t taxon_count) {
  std::vector<std::vector<int>> adjacency(taxon_count + 1);
  int center = int(taxon_count);
  for (int leaf = 0; leaf < 3; ++leaf) {
    adjacency[size_t(leaf)].push_back(center);
    adjacency[size_t(center)].push_back(leaf);
  }
  return adjacency;
}

}  // namespace

Topology Topology::FromAdjacency(size_t taxon_count,
                                 const std::vector<std::vector<int>>& adjacency,
                                 std::optional<int> root,
                                 std::vector<int>* new_ids) {
  const size_t node_count = adjacency.size();
  if (taxon_count == 0 || taxon_count > Clade::kMaxTaxa) {
    Fail(ErrorKind::kUnsupportedSize, "bad taxon count " + std::to_string(taxon_count));
  }
  if (!root && taxon_count < 3) {
    Fail(ErrorKind::kUnsupportedSize, "unrooted trees need at least 3 taxa");
  }
  const size_t expected_nodes = root ? 2 * taxon_count - 1 : 2 * taxon_count - 2;
  if (node_count != expected_nodes) {
    Fail(ErrorKind::kContract, "binary tree on " + std::to_string(taxon_count) +
                                   " taxa needs " + std::to_string(expected_nodes) +
                                   " nodes, got " + std::to_string(node_count));
  }
  for (size_t v = 0; v < node_count; ++v) {
    size_t degree = adjacency[v].size();
    bool ok;
    if (v < taxon_count) {
      ok = degree == 1 || (taxon_count == 1 && degree == 0);
    } else if (root && int(v) == *root) {
      ok = degree == 2;
    } else {
      ok = degree == 3;
    }
    if (!ok) Fail(ErrorKind::kContract, "node " + std::to_string(v) + " has bad degree");
  }

  int start;
  if (root) {
    start = *root;
  } else {
    start = adjacency[0][0];
  }

  // Orient away from the start node.
  std::vector<int> parent(node_count, -2);
  std::vector<std::vector<int>> children(node_count);
  std::vector<int> order;
  order.reserve(node_count);
  std::vector<int> stack{start};
  parent[size_t(start)] = -1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int w : adjacency[size_t(v)]) {
      if (w == parent[size_t(v)]) continue;
      if (parent[size_t(w)] != -2) Fail(ErrorKind::kContract, "adjacency contains a cycle");
      parent[size_t(w)] = v;
      children[size_t(v)].push_back(w);
      stack.push_back(w);
    }
  }
  if (order.size() != node_count) Fail(ErrorKind::kContract, "tree is not connected");

  std::vector<Clade> clades(node_count);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (size_t(v) < taxon_count) {
      clades[size_t(v)] = Clade::Singleton(size_t(v));
    } else {
      for (int c : children[size_t(v)]) clades[size_t(v)] = clades[size_t(v)] | clades[size_t(c)];
    }
  }
  for (auto& kids : children) {
    std::sort(kids.begin(), kids.end(),
              [&](int a, int b) { return clades[size_t(a)] > clades[size_t(b)]; });
  }

  // Relabel internal nodes in canonical post-order.
  std::vector<int> new_id(node_count, -1);
  int next_internal = int(taxon_count);
  std::function<void(int)> relabel = [&](int v) {
    for (int c : children[size_t(v)]) relabel(c);
    new_id[size_t(v)] = size_t(v) < taxon_count ? v : next_internal++;
  };
  relabel(start);

  Topology t;
  t.taxon_count_ = taxon_count;
  t.rooted_ = root.has_value();
  t.parent_.assign(node_count, -1);
  t.children_.assign(node_count, {});
  t.clades_.assign(node_count, Clade());
  for (size_t v = 0; v < node_count; ++v) {
    int id = new_id[v];
    t.parent_[size_t(id)] = parent[v] < 0 ? -1 : new_id[size_t(parent[v])];
    t.clades_[size_t(id)] = clades[v];
    for (int c : children[v]) t.children_[size_t(id)].push_back(new_id[size_t(c)]);
  }
  if (new_ids) *new_ids = std::move(new_id);
  return t;
}

std::vector<int> Topology::Neighbors(int node) const {
  std::vector<int> result = children_[size_t(node)];
  if (parent_[size_t(node)] >= 0) result.push_back(parent_[size_t(node)]);
  return result;
}

std::vector<int> Topology::PostOrder() const {
  // Internal ids are already assigned in post-order; leaves precede their parents.
  std::vector<int> order;
  order.reserve(parent_.size());
  std::function<void(int)> visit = [&](int v) {
    for (int c : children_[size_t(v)]) visit(c);
    order.push_back(v);
  };
  if (!parent_.empty()) visit(Root());
  return order;
}

std::vector<int> Topology::Edges() const {
  std::vector<int> edges;
  for (int v = 0; v < int(parent_.size()); ++v) {
    if (parent_[size_t(v)] >= 0) edges.push_back(v);
  }
  return edges;
}

Split Topology::SplitOfEdge(int edge) const {
  if (edge < 0 || size_t(edge) >= parent_.size() || parent_[size_t(edge)] < 0) {
    Fail(ErrorKind::kMissingEdge, "no edge " + std::to_string(edge));
  }
  const Clade& below = clades_[size_t(edge)];
  return Subsplit::Canonical(below, below.Complement(taxon_count_));
}

int Topology::EdgeOfSplit(const Split& split) const {
  for (int e : Edges()) {
    if (SplitOfEdge(e) == split) return e;
  }
  Fail(ErrorKind::kMissingEdge, "split " + split.ToString(taxon_count_) + " not in tree");
}

void Topology::CheckUnrooted(const char* what) const {
  if (rooted_) Fail(ErrorKind::kWrongRootedness, std::string(what) + " needs an unrooted tree");
}

std::vector<Split> Topology::Splits() const {
  CheckUnrooted("Splits");
  std::vector<Split> splits;
  for (int e : Edges()) splits.push_back(SplitOfEdge(e));
  return splits;
}

std::vector<Split> Topology::NontrivialSplits() const {
  std::vector<Split> splits;
  const Clade full = Clade::Full(taxon_count_);
  for (int e : Edges()) {
    const Clade& below = clades_[size_t(e)];
    if (below.Count() < 2 || below.Count() + 2 > taxon_count_) continue;
    splits.push_back(Subsplit::Canonical(below, full.Minus(below)));
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  return splits;
}

Clade Topology::AwayClade(int from, int to) const {
  if (parent_[size_t(to)] == from) return clades_[size_t(to)];
  return clades_[size_t(from)].Complement(taxon_count_);
}

std::vector<PSP> Topology::PSPsOfEdge(int edge) const {
  CheckUnrooted("PSPsOfEdge");
  const Split anchor = SplitOfEdge(edge);
  std::vector<PSP> psps;
  const auto& below = children_[size_t(edge)];
  if (below.size() == 2) {
    psps.push_back({anchor, Subsplit::Canonical(clades_[size_t(below[0])],
                                                clades_[size_t(below[1])])});
  }
  int p = parent_[size_t(edge)];
  std::vector<Clade> parts;
  for (int w : Neighbors(p)) {
    if (w != edge) parts.push_back(AwayClade(p, w));
  }
  psps.push_back({anchor, Subsplit::Canonical(parts[0], parts[1])});
  std::sort(psps.begin(), psps.end());
  return psps;
}

std::vector<std::vector<int>> Topology::AdjacencyList() const {
  std::vector<std::vector<int>> adjacency(parent_.size());
  for (int v = 0; v < int(parent_.size()); ++v) adjacency[size_t(v)] = Neighbors(v);
  return adjacency;
}

Topology Topology::RootAtEdge(int edge) const {
  CheckUnrooted("RootAtEdge");
  if (edge < 0 || size_t(edge) >= parent_.size() || parent_[size_t(edge)] < 0) {
    Fail(ErrorKind::kMissingEdge, "no edge " + std::to_string(edge));
  }
  auto adjacency = AdjacencyList();
  int p = parent_[size_t(edge)];
  int root = int(adjacency.size());
  RemoveNeighbor(adjacency[size_t(edge)], p);
  RemoveNeighbor(adjacency[size_t(p)], edge);
  adjacency[size_t(edge)].push_back(root);
  adjacency[size_t(p)].push_back(root);
  adjacency.push_back({edge, p});
  return FromAdjacency(taxon_count_, adjacency, root);
}

std::vector<Topology> Topology::AllRootings() const {
  CheckUnrooted("AllRootings");
  std::vector<Topology> rootings;
  for (int e : Edges()) rootings.push_back(RootAtEdge(e));
  return rootings;
}

Topology Topology::Unrooted() const {
  if (!rooted_) Fail(ErrorKind::kWrongRootedness, "Unrooted needs a rooted tree");
  if (taxon_count_ < 3) Fail(ErrorKind::kUnsupportedSize, "unrooted trees need at least 3 taxa");
  auto adjacency = AdjacencyList();
  int root = Root();
  int a = children_[size_t(root)][0];
  int b = children_[size_t(root)][1];
  RemoveNeighbor(adjacency[size_t(a)], root);
  RemoveNeighbor(adjacency[size_t(b)], root);
  adjacency[size_t(a)].push_back(b);
  adjacency[size_t(b)].push_back(a);
  adjacency.pop_back();  // the root is the last node
  return FromAdjacency(taxon_count_, adjacency, std::nullopt);
}

SubsplitDecomposition Topology::Decompose() const {
  if (!rooted_) Fail(ErrorKind::kWrongRootedness, "Decompose needs a rooted tree");
  if (taxon_count_ < 2) Fail(ErrorKind::kUnsupportedSize, "decomposition needs at least 2 taxa");
  const auto& top = children_[size_t(Root())];
  SubsplitDecomposition result{
      Subsplit::Canonical(clades_[size_t(top[0])], clades_[size_t(top[1])]), {}};
  for (int v : PostOrder()) {
    if (v == Root() || clades_[size_t(v)].Count() < 3) continue;
    const auto& siblings = children_[size_t(parent_[size_t(v)])];
    int sister = siblings[0] == v ? siblings[1] : siblings[0];
    const auto& kids = children_[size_t(v)];
    result.records.push_back({clades_[size_t(sister)], clades_[size_t(v)],
                              Subsplit::Canonical(clades_[size_t(kids[0])],
                                                  clades_[size_t(kids[1])])});
  }
  return result;
}

std::vector<SubsplitDecomposition> Topology::RootingDecompositions() const {
  CheckUnrooted("RootingDecompositions");
  std::vector<SubsplitDecomposition> result;
  std::vector<int> others;
  // Visit `node`, entered from `from`, whose sister clade is `sister`.
  std::function<void(int, int, const Clade&, std::vector<SubsplitRecord>&)> expand =
      [&](int node, int from, const Clade& sister, std::vector<SubsplitRecord>& out) {
        Clade clade = AwayClade(from, node);
        if (clade.Count() < 3) return;
        int x = -1, y = -1;
        for (int w : Neighbors(node)) {
          if (w == from) continue;
          (x < 0 ? x : y) = w;
        }
        Clade cx = AwayClade(node, x);
        Clade cy = AwayClade(node, y);
        out.push_back({sister, clade, Subsplit::Canonical(cx, cy)});
        expand(x, node, cy, out);
        expand(y, node, cx, out);
      };
  for (int e : Edges()) {
    int p = parent_[size_t(e)];
    const Clade& below = clades_[size_t(e)];
    Clade above = below.Complement(taxon_count_);
    SubsplitDecomposition d{Subsplit::Canonical(below, above), {}};
    expand(e, p, above, d.records);
    expand(p, e, below, d.records);
    result.push_back(std::move(d));
  }
  return result;
}

size_t Topology::Hash() const {
  size_t h = taxon_count_ * 2 + (rooted_ ? 1 : 0);
  for (int p : parent_) h = h * 1000003 ^ size_t(p + 1);
  return h;
}

std::vector<Topology> EnumerateUnrooted(size_t taxon_count) {
  if (taxon_count < 3 || taxon_count > 8) {
    Fail(ErrorKind::kUnsupportedSize, "enumeration supports 3..8 taxa");
  }
  std::vector<std::vector<std::vector<int>>> partial{StarAdjacency(taxon_count)};
  for (size_t leaf = 3; leaf < taxon_count; ++leaf) {
    std::vector<std::vector<std::vector<int>>> next;
    for (const auto& adjacency : partial) {
      for (auto [a, b] : EdgePairs(adjacency)) {
        auto grown = adjacency;
        InsertLeafOnEdge(grown, a, b, int(leaf));
        next.push_back(std::move(grown));
      }
    }
    partial = std::move(next);
  }
  std::vector<Topology> result;
  result.reserve(partial.size());
  for (const auto& adjacency : partial) {
    result.push_back(Topology::FromAdjacency(taxon_count, adjacency, std::nullopt));
  }
  return result;
}

Topology RandomUnrootedTopology(size_t taxon_count, Rng& rng) {
  if (taxon_count < 3) Fail(ErrorKind::kUnsupportedSize, "unrooted trees need at least 3 taxa");
  auto adjacency = StarAdjacency(taxon_count);
  for (size_t leaf = 3; leaf < taxon_count; ++leaf) {
    auto edges = EdgePairs(adjacency);
    std::uniform_int_distribution<size_t> pick(0, edges.size() - 1);
    auto [a, b] = edges[pick(rng)];
    InsertLeafOnEdge(adjacency, a, b, int(leaf));
  }
  return Topology::FromAdjacency(taxon_count, adjacency, std::nullopt);
}

Topology RandomNNI(const Topology& unrooted, Rng& rng) {
  if (unrooted.IsRooted()) Fail(ErrorKind::kWrongRootedness, "RandomNNI needs an unrooted tree");
  std::vector<int> internal_edges;
  for (int e : unrooted.Edges()) {
    if (!unrooted.IsLeaf(e)) internal_edges.push_back(e);
  }
  if (internal_edges.empty()) return unrooted;
  std::uniform_int_distribution<size_t> pick_edge(0, internal_edges.size() - 1);
  int u = internal_edges[pick_edge(rng)];
  int v = unrooted.Parent(u);
  std::vector<std::vector<int>> adjacency(unrooted.NodeCount());
  for (int w = 0; w < int(unrooted.NodeCount()); ++w) adjacency[size_t(w)] = unrooted.Neighbors(w);
  std::vector<int> u_side, v_side;
  for (int w : adjacency[size_t(u)]) {
    if (w != v) u_side.push_back(w);
  }
  for (int w : adjacency[size_t(v)]) {
    if (w != u) v_side.push_back(w);
  }
  std::uniform_int_distribution<size_t> pick2(0, 1);
  int a = u_side[pick2(rng)];
  int b = v_side[pick2(rng)];
  // Swap subtree a (hanging from u) with subtree b (hanging from v).
  RemoveNeighbor(adjacency[size_t(u)], a);
  RemoveNeighbor(adjacency[size_t(a)], u);
  RemoveNeighbor(adjacency[size_t(v)], b);
  RemoveNeighbor(adjacency[size_t(b)], v);
  adjacency[size_t(u)].push_back(b);
  adjacency[size_t(b)].push_back(u);
  adjacency[size_t(v)].push_back(a);
  adjacency[size_t(a)].push_back(v);
  return Topology::FromAdjacency(unrooted.TaxonCount(), adjacency, std::nullopt);
}

}  // namespace vbpi
