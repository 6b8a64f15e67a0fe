#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "vbpi/error.hpp"

namespace vbpi {

// A set of taxa stored as a fixed-width bitset; taxon i is bit i.
//
// The canonical order treats the clade as a bitstring with taxon 0 as the most
// significant position, so a clade containing a lower-index taxon compares greater.
class Clade {
 public:
  static constexpr size_t kMaxTaxa = 128;

  Clade() = default;

  static Clade Singleton(size_t taxon) {
    Clade c;
    c.Set(taxon);
    return c;
  }
  static Clade Full(size_t taxon_count) {
    Clade c;
    for (size_t i = 0; i < taxon_count; ++i) c.Set(i);
    return c;
  }
  // Parses a '0'/'1' string in taxon order.
  static Clade FromBitString(std::string_view bits) {
    if (bits.size() > kMaxTaxa) Fail(ErrorKind::kInvalidClade, "bitstring too long");
    Clade c;
    for (size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') {
        c.Set(i);
      } else if (bits[i] != '0') {
        Fail(ErrorKind::kInvalidClade, "bad bitstring '" + std::string(bits) + "'");
      }
    }
    return c;
  }

  void Set(size_t taxon) {
    if (taxon >= kMaxTaxa) Fail(ErrorKind::kInvalidClade, "taxon index out of range");
    words_[taxon / 64] |= uint64_t{1} << (taxon % 64);
  }
  bool Contains(size_t taxon) const {
    return (words_[taxon / 64] >> (taxon % 64)) & 1U;
  }
  size_t Count() const {
    return size_t(std::popcount(words_[0]) + std::popcount(words_[1]));
  }
  bool Empty() const { return words_[0] == 0 && words_[1] == 0; }
  bool Intersects(const Clade& other) const { return !(*this & other).Empty(); }
  bool IsSubsetOf(const Clade& other) const { return (*this & other) == *this; }
  // Lowest taxon index in the clade; undefined for the empty clade.
  size_t LowestTaxon() const {
    return words_[0] != 0 ? size_t(std::countr_zero(words_[0]))
                          : 64 + size_t(std::countr_zero(words_[1]));
  }
  Clade Complement(size_t taxon_count) const { return Full(taxon_count) & ~*this; }

  Clade operator|(const Clade& o) const { return {words_[0] | o.words_[0], words_[1] | o.words_[1]}; }
  Clade operator&(const Clade& o) const { return {words_[0] & o.words_[0], words_[1] & o.words_[1]}; }
  Clade operator~() const { return {~words_[0], ~words_[1]}; }
  Clade Minus(const Clade& o) const { return *this & ~o; }

  bool operator==(const Clade& o) const = default;
  std::strong_ordering operator<=>(const Clade& o) const {
    for (size_t w = 0; w < 2; ++w) {
      uint64_t diff = words_[w] ^ o.words_[w];
      if (diff != 0) {
        uint64_t lowest = diff & (~diff + 1);
        return (words_[w] & lowest) ? std::strong_ordering::greater
                                    : std::strong_ordering::less;
      }
    }
    return std::strong_ordering::equal;
  }

  std::string ToBitString(size_t taxon_count) const {
    std::string s(taxon_count, '0');
    for (size_t i = 0; i < taxon_count; ++i) {
      if (Contains(i)) s[i] = '1';
    }
    return s;
  }

  size_t Hash() const {
    return size_t(SplitMixHash(words_[0] ^ SplitMixHash(words_[1] + 0x51ed27ULL)));
  }

 private:
  Clade(uint64_t lo, uint64_t hi) : words_{lo, hi} {}
  static uint64_t SplitMixHash(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::array<uint64_t, 2> words_{};
};

// An ordered pair of disjoint nonempty clades. The leading clade is the one that
// contains the lowest-index taxon of the union (the greater one under Clade's order).
class Subsplit {
 public:
  Subsplit() = default;

  static Subsplit Canonical(const Clade& a, const Clade& b) {
    if (a.Empty() || b.Empty()) Fail(ErrorKind::kInvalidClade, "subsplit with empty clade");
    if (a.Intersects(b)) Fail(ErrorKind::kInvalidClade, "subsplit with overlapping clades");
    return a > b ? Subsplit(a, b) : Subsplit(b, a);
  }
  // "0110|1001" style, in taxon order.
  static Subsplit FromString(std::string_view text) {
    auto bar = text.find('|');
    if (bar == std::string_view::npos) Fail(ErrorKind::kParse, "subsplit missing '|'");
    return Canonical(Clade::FromBitString(text.substr(0, bar)),
                     Clade::FromBitString(text.substr(bar + 1)));
  }

  const Clade& First() const { return first_; }
  const Clade& Second() const { return second_; }
  Clade Union() const { return first_ | second_; }
  bool IsSplitOf(size_t taxon_count) const { return Union() == Clade::Full(taxon_count); }
  std::string ToString(size_t taxon_count) const {
    return first_.ToBitString(taxon_count) + "|" + second_.ToBitString(taxon_count);
  }

  bool operator==(const Subsplit&) const = default;
  std::strong_ordering operator<=>(const Subsplit&) const = default;
  size_t Hash() const { return first_.Hash() * 31 + second_.Hash(); }

 private:
  Subsplit(const Clade& first, const Clade& second) : first_(first), second_(second) {}
  Clade first_;
  Clade second_;
};

// A split is a subsplit of the full taxon set.
using Split = Subsplit;

// Primary subsplit pair: a split together with a subsplit of one of its sides.
struct PSP {
  Split anchor;
  Subsplit side;

  bool operator==(const PSP&) const = default;
  std::strong_ordering operator<=>(const PSP&) const = default;
  size_t Hash() const { return anchor.Hash() * 131 + side.Hash(); }
  std::string ToString(size_t taxon_count) const {
    return anchor.ToString(taxon_count) + "/" + side.ToString(taxon_count);
  }
};

struct CladeHash {
  size_t operator()(const Clade& c) const { return c.Hash(); }
};
struct SubsplitHash {
  size_t operator()(const Subsplit& s) const { return s.Hash(); }
};
struct PSPHash {
  size_t operator()(const PSP& p) const { return p.Hash(); }
};

}  // namespace vbpi
