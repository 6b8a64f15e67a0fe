#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vbpi/taxon_set.hpp"

namespace vbpi {

// N taxa by M sites over {A,C,G,T} plus the ambiguity codes '-', '?', 'N'.
struct Alignment {
  TaxonSet taxa;
  std::vector<std::string> rows;  // uppercase, one per taxon in taxa order

  size_t TaxonCount() const { return rows.size(); }
  size_t SiteCount() const { return rows.empty() ? 0 : rows[0].size(); }
};

Alignment ReadFasta(std::istream& in);
Alignment ReadFastaFile(const std::string& path);
void WriteFasta(std::ostream& out, const Alignment& alignment);

// Nucleotide state mask: bit 0..3 = A, C, G, T. Ambiguity codes map to 0xF.
uint8_t StateMask(char c);
inline constexpr const char* kNucleotides = "ACGT";

// Distinct alignment columns with multiplicities.
struct SitePatterns {
  size_t taxon_count = 0;
  std::vector<uint8_t> masks;  // pattern-major: masks[p * taxon_count + taxon]
  std::vector<double> weights;

  size_t PatternCount() const { return weights.size(); }
  uint8_t Mask(size_t pattern, size_t taxon) const { return masks[pattern * taxon_count + taxon]; }
};

SitePatterns CompressPatterns(const Alignment& alignment);

}  // namespace vbpi
