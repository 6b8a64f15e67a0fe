#pragma once

#include <array>
#include <string>
#include <string_view>

#include "vbpi/topology.hpp"

namespace vbpi {

// Minimum number of unit-cost changes given each root state, in A, C, G, T order.
using StateScores = std::array<int, 4>;

// Sankoff recursion on a rooted tree; `column[v]` is the character of leaf v.
// Throws kDomain for characters outside ACGT.
StateScores SankoffScores(const Topology& rooted, std::string_view column);
// Scores of the subtree under `node`.
StateScores SankoffScores(const Topology& rooted, std::string_view column, int node);
// Combines the scores of two sibling subtrees into their parent's scores.
StateScores JoinScores(const StateScores& left, const StateScores& right);

int ParsimonyScore(const Topology& t, std::string_view column);

// "A→2,C→1,G→3,T→3", with the minima wrapped in asterisks when `mark_best`.
std::string FormatScores(const StateScores& scores, bool mark_best = false);

}  // namespace vbpi
