#include "vbpi/tree_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

Topology ParseLine(const std::string& text, const TaxonSet& taxa, size_t line_number) {
  try {
    Topology t = ParseNewick(text, taxa).topology;
    return t.IsRooted() ? t.Unrooted() : t;
  } catch (const Error& e) {
    if (e.Kind() == ErrorKind::kParse) {
      Fail(ErrorKind::kParse, "line " + std::to_string(line_number) + ": " + e.what());
    }
    Fail(e.Kind(), "line " + std::to_string(line_number) + ": " + e.what());
  }
}

std::ifstream OpenOrFail(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return in;
}

}  // namespace

CandidateTreeSet ReadTreeList(std::istream& in, const TaxonSet& taxa) {
  CandidateTreeSet result{taxa, {}};
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    line = StripCr(line);
    if (IsBlank(line)) continue;
    result.trees.push_back(ParseLine(line, taxa, line_number));
  }
  if (result.trees.empty()) Fail(ErrorKind::kEmptyInput, "tree list is empty");
  return result;
}

CandidateTreeSet ReadTreeListFile(const std::string& path, const TaxonSet& taxa) {
  auto in = OpenOrFail(path);
  return ReadTreeList(in, taxa);
}

TaxonSet TaxaFromTreeListFile(const std::string& path) {
  auto in = OpenOrFail(path);
  std::string line;
  while (std::getline(in, line)) {
    line = StripCr(line);
    if (!IsBlank(line)) return TaxonSet(NewickLeafNames(line));
  }
  Fail(ErrorKind::kEmptyInput, "tree list is empty");
}

ReferencePosterior ReadReferencePosterior(std::istream& in, const TaxonSet& taxa) {
  ReferencePosterior result;
  std::unordered_set<Topology, TopologyHash> seen;
  std::string line;
  size_t line_number = 0;
  double total = 0.0;
  while (std::getline(in, line)) {
    ++line_number;
    line = StripCr(line);
    if (IsBlank(line)) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      Fail(ErrorKind::kParse, "line " + std::to_string(line_number) + ": expected <newick>\\t<p>");
    }
    std::string number = line.substr(tab + 1);
    double p = 0.0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), p);
    if (ec != std::errc() || ptr != number.data() + number.size()) {
      Fail(ErrorKind::kParse, "line " + std::to_string(line_number) + ": bad probability");
    }
    if (!(p > 0.0 && p <= 1.0)) {
      Fail(ErrorKind::kRange, "line " + std::to_string(line_number) + ": probability " + number +
                                  " outside (0, 1]");
    }
    Topology t = ParseLine(line.substr(0, tab), taxa, line_number);
    if (!seen.insert(t).second) {
      Fail(ErrorKind::kDuplicate, "line " + std::to_string(line_number) + ": duplicate topology");
    }
    total += p;
    result.topologies.push_back(std::move(t));
    result.probabilities.push_back(p);
  }
  if (result.topologies.empty()) Fail(ErrorKind::kEmptyInput, "reference posterior is empty");
  if (total > 1.0 + 1e-9) Fail(ErrorKind::kRange, "reference probabilities sum above 1");
  return result;
}

ReferencePosterior ReadReferencePosteriorFile(const std::string& path, const TaxonSet& taxa) {
  auto in = OpenOrFail(path);
  return ReadReferencePosterior(in, taxa);
}

void WriteReferencePosterior(std::ostream& out, const ReferencePosterior& reference,
                             const TaxonSet& taxa) {
  char buffer[64];
  for (size_t i = 0; i < reference.topologies.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", reference.probabilities[i]);
    out << ToNewick(reference.topologies[i], taxa) << '\t' << buffer << '\n';
  }
}

}  // namespace vbpi
