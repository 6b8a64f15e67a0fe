#include "vbpi/newick.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

struct RawNode {
  std::string name;
  std::optional<double> length;
  std::vector<int> children;
};

class NewickReader {
 public:
  explicit NewickReader(std::string_view text) : text_(text) {}

  std::vector<RawNode> Read() {
    SkipSpace();
    ParseSubtree();
    SkipSpace();
    Expect(';');
    SkipSpace();
    if (pos_ != text_.size()) Error("trailing characters after ';'");
    return std::move(nodes_);
  }

 private:
  int ParseSubtree() {
    int id = int(nodes_.size());
    nodes_.emplace_back();
    SkipSpace();
    if (Peek() == '(') {
      ++pos_;
      while (true) {
        int child = ParseSubtree();
        nodes_[size_t(id)].children.push_back(child);
        SkipSpace();
        if (Peek() == ',') {
          ++pos_;
          continue;
        }
        Expect(')');
        break;
      }
      if (nodes_[size_t(id)].children.size() < 2) Error("internal node with one child");
      SkipSpace();
      if (IsNameStart(Peek())) ParseName();  // internal labels are ignored
    } else {
      nodes_[size_t(id)].name = ParseName();
    }
    SkipSpace();
    if (Peek() == ':') {
      ++pos_;
      SkipSpace();
      nodes_[size_t(id)].length = ParseNumber();
    }
    return id;
  }

  std::string ParseName() {
    if (Peek() == '\'') {
      ++pos_;
      std::string name;
      while (true) {
        if (pos_ >= text_.size()) Error("unterminated quoted name");
        char c = text_[pos_++];
        if (c == '\'') {
          if (Peek() == '\'') {
            name.push_back('\'');
            ++pos_;
            continue;
          }
          break;
        }
        name.push_back(c);
      }
      if (name.empty()) Error("empty quoted name");
      return name;
    }
    size_t start = pos_;
    while (pos_ < text_.size() && IsNameChar(text_[pos_])) ++pos_;
    if (start == pos_) Error("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  double ParseNumber() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' || text_[pos_] == '-' ||
            text_[pos_] == '+')) {
      ++pos_;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) Error("bad branch length");
    return value;
  }

  static bool IsNameChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  }
  static bool IsNameStart(char c) { return IsNameChar(c) || c == '\''; }
  char Peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void Expect(char c) {
    if (Peek() != c) Error(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void Error(const std::string& what) const {
    Fail(ErrorKind::kParse, "newick: " + what + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  size_t pos_ = 0;
  std::vector<RawNode> nodes_;
};

bool NeedsQuoting(const std::string& name) {
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
      return true;
    }
  }
  return name.empty();
}

std::string QuoteName(const std::string& name) {
  if (!NeedsQuoting(name)) return name;
  std::string out = "'";
  for (char c : name) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  out.push_back('\'');
  return out;
}

std::string FormatLength(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

}  // namespace

std::vector<std::string> NewickLeafNames(std::string_view newick) {
  std::vector<std::string> names;
  for (const auto& node : NewickReader(newick).Read()) {
    if (node.children.empty()) names.push_back(node.name);
  }
  return names;
}

ParsedTree ParseNewick(std::string_view newick, const TaxonSet& taxa) {
  std::vector<RawNode> raw = NewickReader(newick).Read();
  const size_t n = taxa.Size();
  size_t leaf_count = 0;
  for (const auto& node : raw) leaf_count += node.children.empty() ? 1 : 0;
  if (leaf_count != n) {
    Fail(ErrorKind::kTaxonSet, "tree has " + std::to_string(leaf_count) + " leaves, expected " +
                                   std::to_string(n));
  }

  const size_t top_degree = raw[0].children.size();
  bool rooted;
  if (top_degree == 2 || (top_degree == 0 && n == 1)) {
    rooted = true;
  } else if (top_degree == 3) {
    rooted = false;
  } else {
    Fail(ErrorKind::kParse, "newick: top-level node has " + std::to_string(top_degree) +
                                " children");
  }

  // Raw node -> adjacency id: leaves by taxon index, internal nodes after them.
  std::vector<int> id(raw.size(), -1);
  std::vector<bool> seen(n, false);
  int next_internal = int(n);
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].children.empty()) {
      size_t taxon = taxa.IndexOf(raw[i].name);
      if (seen[taxon]) Fail(ErrorKind::kDuplicateTaxon, "taxon '" + raw[i].name + "' repeated");
      seen[taxon] = true;
      id[i] = int(taxon);
    } else {
      if (i != 0 && raw[i].children.size() != 2) {
        Fail(ErrorKind::kParse, "newick: multifurcating internal node");
      }
      id[i] = next_internal++;
    }
  }
  std::vector<std::vector<int>> adjacency(static_cast<size_t>(next_internal));
  std::map<std::pair<int, int>, double> lengths;
  bool any_length = false;
  for (size_t i = 0; i < raw.size(); ++i) {
    for (int c : raw[i].children) {
      int a = id[i], b = id[size_t(c)];
      adjacency[size_t(a)].push_back(b);
      adjacency[size_t(b)].push_back(a);
      if (raw[size_t(c)].length) {
        lengths[{std::min(a, b), std::max(a, b)}] = *raw[size_t(c)].length;
        any_length = true;
      }
    }
  }
  std::vector<int> new_ids;
  ParsedTree result;
  result.topology = Topology::FromAdjacency(n, adjacency, rooted ? std::optional<int>(id[0])
                                                                 : std::nullopt, &new_ids);
  if (any_length) {
    std::vector<int> old_of(new_ids.size());
    for (size_t old = 0; old < new_ids.size(); ++old) old_of[size_t(new_ids[old])] = int(old);
    result.branch_lengths.assign(result.topology.NodeCount(),
                                 std::numeric_limits<double>::quiet_NaN());
    result.branch_lengths[size_t(result.topology.Root())] = 0.0;
    for (int e : result.topology.Edges()) {
      int a = old_of[size_t(e)], b = old_of[size_t(result.topology.Parent(e))];
      auto it = lengths.find({std::min(a, b), std::max(a, b)});
      if (it != lengths.end()) result.branch_lengths[size_t(e)] = it->second;
    }
  }
  return result;
}

std::string ToNewick(const Topology& topology, const TaxonSet& taxa,
                     const BranchLengths& branch_lengths) {
  if (taxa.Size() != topology.TaxonCount()) Fail(ErrorKind::kTaxonSet, "taxon count mismatch");
  std::string out;
  auto emit = [&](auto&& self, int v) -> void {
    if (topology.IsLeaf(v)) {
      out += QuoteName(taxa.Name(size_t(v)));
    } else {
      out.push_back('(');
      bool first = true;
      for (int c : topology.Children(v)) {
        if (!first) out.push_back(',');
        first = false;
        self(self, c);
      }
      out.push_back(')');
    }
    if (!branch_lengths.empty() && v != topology.Root()) {
      out.push_back(':');
      out += FormatLength(branch_lengths.at(size_t(v)));
    }
  };
  emit(emit, topology.Root());
  out.push_back(';');
  return out;
}

}  // namespace vbpi
