#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vbpi/clade.hpp"
#include "vbpi/error.hpp"

namespace vbpi {

// Ordered list of distinct taxon names; the position of a name is its taxon index.
class TaxonSet {
 public:
  TaxonSet() = default;
  explicit TaxonSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > Clade::kMaxTaxa) {
      Fail(ErrorKind::kUnsupportedSize, "at most " + std::to_string(Clade::kMaxTaxa) + " taxa");
    }
    for (size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) Fail(ErrorKind::kTaxonSet, "empty taxon name");
      if (!index_.emplace(names_[i], i).second) {
        Fail(ErrorKind::kDuplicateTaxon, "duplicate taxon '" + names_[i] + "'");
      }
    }
  }

  size_t Size() const { return names_.size(); }
  const std::vector<std::string>& Names() const { return names_; }
  const std::string& Name(size_t i) const { return names_.at(i); }
  std::optional<size_t> Find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  size_t IndexOf(const std::string& name) const {
    auto found = Find(name);
    if (!found) Fail(ErrorKind::kTaxonSet, "unknown taxon '" + name + "'");
    return *found;
  }

  bool operator==(const TaxonSet& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace vbpi
