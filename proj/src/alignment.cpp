#include "vbpi/alignment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "vbpi/error.hpp"

namespace vbpi {

namespace {

std::string Trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

uint8_t StateMask(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'A': return 0x1;
    case 'C': return 0x2;
    case 'G': return 0x4;
    case 'T': return 0x8;
    case '-':
    case '?':
    case 'N': return 0xF;
    default:
      Fail(ErrorKind::kDomain, std::string("invalid sequence character '") + c + "'");
  }
}

Alignment ReadFasta(std::istream& in) {
  std::vector<std::string> names;
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '>') {
      names.push_back(Trim(line.substr(1)));
      rows.emplace_back();
      continue;
    }
    std::string seq;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      StateMask(c);
      seq.push_back(char(std::toupper(static_cast<unsigned char>(c))));
    }
    if (seq.empty()) continue;
    if (rows.empty()) Fail(ErrorKind::kParse, "fasta: sequence data before the first header");
    rows.back() += seq;
  }
  if (names.empty()) Fail(ErrorKind::kEmptyInput, "fasta: no records");
  Alignment alignment{TaxonSet(names), std::move(rows)};
  const size_t length = alignment.rows[0].size();
  for (size_t i = 0; i < alignment.rows.size(); ++i) {
    if (alignment.rows[i].size() != length || length == 0) {
      Fail(ErrorKind::kAlignmentShape,
           "fasta: record '" + names[i] + "' has length " +
               std::to_string(alignment.rows[i].size()) + ", expected " + std::to_string(length));
    }
  }
  return alignment;
}

Alignment ReadFastaFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return ReadFasta(in);
}

void WriteFasta(std::ostream& out, const Alignment& alignment) {
  for (size_t i = 0; i < alignment.rows.size(); ++i) {
    out << '>' << alignment.taxa.Name(i) << '\n' << alignment.rows[i] << '\n';
  }
}

SitePatterns CompressPatterns(const Alignment& alignment) {
  const size_t n = alignment.TaxonCount();
  SitePatterns patterns;
  patterns.taxon_count = n;
  std::map<std::vector<uint8_t>, size_t> index;
  std::vector<uint8_t> column(n);
  for (size_t site = 0; site < alignment.SiteCount(); ++site) {
    for (size_t t = 0; t < n; ++t) column[t] = StateMask(alignment.rows[t][site]);
    auto [it, inserted] = index.emplace(column, patterns.weights.size());
    if (inserted) {
      patterns.masks.insert(patterns.masks.end(), column.begin(), column.end());
      patterns.weights.push_back(1.0);
    } else {
      patterns.weights[it->second] += 1.0;
    }
  }
  return patterns;
}

}  // namespace vbpi
