#include "vbpi/parsimony.hpp"

#include <algorithm>
#include <vector>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

int StateIndex(char c) {
  switch (c) {
    case 'A': case 'a': return 0;
    case 'C': case 'c': return 1;
    case 'G': case 'g': return 2;
    case 'T': case 't': return 3;
    default: Fail(ErrorKind::kDomain, std::string("parsimony character '") + c + "' is not ACGT");
  }
}

constexpr int kInfinity = 1 << 20;

}  // namespace

StateScores JoinScores(const StateScores& left, const StateScores& right) {
  StateScores out{};
  for (int x = 0; x < 4; ++x) {
    int best_l = kInfinity, best_r = kInfinity;
    for (int y = 0; y < 4; ++y) {
      best_l = std::min(best_l, left[size_t(y)] + (x == y ? 0 : 1));
      best_r = std::min(best_r, right[size_t(y)] + (x == y ? 0 : 1));
    }
    out[size_t(x)] = best_l + best_r;
  }
  return out;
}

StateScores SankoffScores(const Topology& t, std::string_view column, int node) {
  if (column.size() != t.TaxonCount()) Fail(ErrorKind::kContract, "column length differs from taxon count");
  std::vector<StateScores> scores(t.NodeCount());
  for (int v : t.PostOrder()) {
    if (t.IsLeaf(v)) {
      scores[size_t(v)].fill(kInfinity);
      scores[size_t(v)][size_t(StateIndex(column[size_t(v)]))] = 0;
      continue;
    }
    const auto& children = t.Children(v);
    StateScores acc = scores[size_t(children[0])];
    for (size_t i = 1; i < children.size(); ++i) {
      if (i == 1) {
        acc = JoinScores(acc, scores[size_t(children[i])]);
      } else {
        // Third child of an unrooted root: add its best per-state cost.
        for (int x = 0; x < 4; ++x) {
          int best = kInfinity;
          for (int y = 0; y < 4; ++y) {
            best = std::min(best, scores[size_t(children[i])][size_t(y)] + (x == y ? 0 : 1));
          }
          acc[size_t(x)] += best;
        }
      }
    }
    scores[size_t(v)] = acc;
  }
  return scores[size_t(node)];
}

StateScores SankoffScores(const Topology& t, std::string_view column) {
  return SankoffScores(t, column, t.Root());
}

int ParsimonyScore(const Topology& t, std::string_view column) {
  auto s = SankoffScores(t, column);
  return *std::min_element(s.begin(), s.end());
}

std::string FormatScores(const StateScores& scores, bool mark_best) {
  const int best = *std::min_element(scores.begin(), scores.end());
  std::string out;
  for (int x = 0; x < 4; ++x) {
    if (x) out += ",";
    bool mark = mark_best && scores[size_t(x)] == best;
    if (mark) out += "*";
    out += "ACGT"[x];
    out += "→" + std::to_string(scores[size_t(x)]);
    if (mark) out += "*";
  }
  return out;
}

}  // namespace vbpi
